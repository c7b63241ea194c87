"""Exception types shared across the package."""


class NetredError(Exception):
    """Base class for all library errors."""


class NumericalFailureError(NetredError):
    """A dense linear-algebra routine failed to converge or lost accuracy.

    ``detail`` carries whatever progress indicator the backend reports
    (for LAPACK, the ``info`` value).
    """

    def __init__(self, message, detail=None):
        super().__init__(message)
        self.detail = detail


class StabilityError(NetredError):
    """A matrix required to be Hurwitz has an eigenvalue too close to or
    beyond the imaginary axis."""


class MultiplicityError(NetredError):
    """More than one eigenvalue sits at the origin (or a complex pair does),
    so the singular-equation machinery does not apply."""


class InconsistentEquationError(NetredError):
    """The right-hand side has mass on a singular block, so the matrix
    equation has no solution."""

    def __init__(self, message, defect):
        super().__init__(message)
        self.defect = defect


class SingularPencilError(NetredError):
    """The polynomial matrix pencil is singular at the requested point."""


class UnboundedNormError(NetredError):
    """The requested H2 norm is infinite: the impulse response does not
    decay to zero."""


class TruncationError(NetredError):
    """The quadrature horizon is too short; ``tail`` estimates the
    remaining relative mass."""

    def __init__(self, message, tail):
        super().__init__(message)
        self.tail = tail


class ModelStructureError(NetredError):
    """A coefficient matrix violates the second-order network structure.

    ``violations`` lists every failed condition, not just the one that
    raised.
    """

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class MassMatrixError(ModelStructureError):
    """Inertia matrix is not diagonal positive."""


class DampingMatrixError(ModelStructureError):
    """Damping matrix is not symmetric positive definite."""


class StiffnessMatrixError(ModelStructureError):
    """Stiffness matrix is not a weighted graph Laplacian."""


class ConnectivityError(ModelStructureError):
    """The coupling graph of the stiffness matrix is disconnected."""


class NotLaplacianError(NetredError):
    """A matrix handed to the graph reconstruction is not a Laplacian."""


class GenerationError(NetredError):
    """A random generator exhausted its retry budget."""


class FileFormatError(NetredError):
    """A network or partition file does not match the expected schema."""
