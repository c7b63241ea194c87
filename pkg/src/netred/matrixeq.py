"""Dense kernels for standard and singular Sylvester/Lyapunov-type equations.

The solvers here accept semistable coefficient matrices: at most one simple
eigenvalue at the origin, everything else strictly in the open left half
plane.  The singular case is handled by ordering the zero eigenvalue to the
trailing diagonal position of a real Schur form, splitting off the scalar
equation it induces (whose unknown is free and whose right-hand side must
vanish for the equation to be solvable), and back-substituting the strictly
stable remainder through LAPACK's quasi-triangular Sylvester solver.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import get_lapack_funcs, schur, solve_continuous_lyapunov

from .errors import (
    InconsistentEquationError,
    MultiplicityError,
    NumericalFailureError,
    StabilityError,
)

# An eigenvalue counts as "at the origin" when |Re| and |Im| are both below
# this fraction of the spectral norm of its matrix.
ZERO_EIG_RTOL = 1e-9
# Right-hand-side mass tolerated on the singular scalar equation, relative to
# the Frobenius norm of the full right-hand side.
CONSISTENCY_RTOL = 1e-7


@dataclass(frozen=True)
class RealSchurForm:
    """Ordered real Schur factorization ``a = q @ t @ q.T``.

    ``t`` is quasi-upper-triangular (1x1 and 2x2 diagonal blocks only) and
    eigenvalue blocks within ``zero_tol`` of the origin are placed last;
    ``eig_order`` states that convention, ``zero_count`` how many eigenvalues
    were classified as zero.
    """

    q: np.ndarray
    t: np.ndarray
    eig_order: str
    zero_tol: float
    zero_count: int


@dataclass(frozen=True)
class SolveReport:
    """Diagnostics of a matrix-equation solve.

    ``residual_rel`` is the equation residual relative to
    ``max(1, ||c||_F)``; ``singular_blocks_zeroed`` counts singular diagonal
    equations whose free unknown was fixed; ``consistency_defect`` is the
    right-hand-side magnitude found on those equations.
    """

    residual_rel: float
    singular_blocks_zeroed: int
    consistency_defect: float


def _as_square(a, name):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError(f"{name} contains non-finite entries")
    return a


def _diag_blocks(t):
    """Yield ``(start, size)`` for the diagonal blocks of a real Schur matrix."""
    k = t.shape[0]
    i = 0
    while i < k:
        if i + 1 < k and t[i + 1, i] != 0.0:
            yield i, 2
            i += 2
        else:
            yield i, 1
            i += 1


def real_schur(a):
    """Ordered real Schur decomposition with near-zero eigenvalues last.

    Parameters
    ----------
    a : (k, k) array_like
        Real square matrix.

    Returns
    -------
    RealSchurForm

    Raises
    ------
    NumericalFailureError
        If the underlying QR iteration fails to converge or the eigenvalue
        reordering breaks down.
    """
    a = _as_square(a, "a")
    tol = ZERO_EIG_RTOL * (np.linalg.norm(a, 2) if a.size else 0.0)

    def keep_first(re, im):
        # strictly nonzero eigenvalues are sorted to the top left
        return abs(re) > tol or abs(im) > tol

    try:
        t, q, _ = schur(a, output="real", sort=keep_first)
    except np.linalg.LinAlgError as exc:  # scipy re-uses numpy's LinAlgError
        raise NumericalFailureError(
            f"real Schur decomposition did not converge: {exc}", detail=str(exc)
        ) from exc

    zero_count = 0
    for start, size in _diag_blocks(t):
        block_eigs = np.linalg.eigvals(t[start : start + size, start : start + size])
        zero_count += int(
            np.sum((np.abs(block_eigs.real) <= tol) & (np.abs(block_eigs.imag) <= tol))
        )
    return RealSchurForm(
        q=q,
        t=t,
        eig_order=f"eigenvalue blocks with |Re|,|Im| <= {tol:.3e} ordered last",
        zero_tol=tol,
        zero_count=zero_count,
    )


def _ordered_schur_split(a, name):
    """Schur-factor ``a`` and locate its (at most simple) zero eigenvalue.

    Returns ``(q, t, has_zero)``; raises MultiplicityError when the zero
    eigenvalue is not simple and real, NumericalFailureError when the
    reordering left a zero block away from the trailing position.
    """
    form = real_schur(a)
    t = form.t
    tol = form.zero_tol
    k = t.shape[0]

    blocks = list(_diag_blocks(t))
    zero_positions = []
    for start, size in blocks:
        sub = t[start : start + size, start : start + size]
        eigs = np.linalg.eigvals(sub)
        near = (np.abs(eigs.real) <= tol) & (np.abs(eigs.imag) <= tol)
        if size == 2 and np.any(np.abs(eigs.real) <= tol):
            raise MultiplicityError(
                f"{name} has a complex eigenvalue pair on the imaginary axis "
                f"({eigs[0]:.3e}); the singular-equation machinery handles only "
                "a simple real zero eigenvalue"
            )
        if np.any(near):
            zero_positions.append(start)
    if len(zero_positions) > 1:
        raise MultiplicityError(
            f"{name} has {len(zero_positions)} eigenvalues within {tol:.3e} of the "
            "origin; at most one is supported"
        )
    has_zero = bool(zero_positions)
    if has_zero and zero_positions[0] != k - 1:
        raise NumericalFailureError(
            f"Schur reordering left the zero eigenvalue of {name} at position "
            f"{zero_positions[0]} instead of last"
        )
    return form.q, t, has_zero


def _trsyl(ta, tb, rhs):
    """Solve ``ta @ x + x @ tb.T = rhs`` with both factors quasi-triangular."""
    if min(rhs.shape) == 0:
        return np.zeros_like(rhs)
    trsyl = get_lapack_funcs(("trsyl",), (ta, tb, rhs))[0]
    x, scale, info = trsyl(ta, tb, rhs, isgn=1, trana="N", tranb="T")
    if info < 0:
        raise NumericalFailureError(f"trsyl: illegal argument {-info}", detail=info)
    if info == 1:
        raise NumericalFailureError(
            "trsyl: coefficient matrices have common or nearly common "
            "eigenvalues outside the supported simple-zero pairing",
            detail=info,
        )
    return x / scale


def _solve_sylvester_core(a, b, c, free_value):
    """Particular solution of ``a @ x + x @ b + c = 0``.

    Transformed to ordered Schur coordinates of ``a`` and ``b.T``.  When both
    matrices carry a zero eigenvalue, the trailing scalar equation is
    singular: its right-hand side is the consistency defect and its unknown
    is free (assigned ``free_value``).
    """
    qa, ta, za = _ordered_schur_split(a, "a")
    qb, tb, zb = _ordered_schur_split(np.ascontiguousarray(b.T), "b")
    ct = qa.T @ c @ qb
    cnorm = float(np.linalg.norm(c))

    defect = 0.0
    zeroed = 0
    if not (za and zb):
        y = _trsyl(ta, tb, -ct)
    else:
        n1 = ta.shape[0] - 1
        n2 = tb.shape[0] - 1
        a11, a12 = ta[:n1, :n1], ta[:n1, n1:]
        b11, b12 = tb[:n2, :n2], tb[:n2, n2:]

        defect = float(abs(ct[n1, n2]))
        if defect > CONSISTENCY_RTOL * cnorm:
            raise InconsistentEquationError(
                f"right-hand side puts mass {defect:.3e} on the singular "
                f"equation (tolerance {CONSISTENCY_RTOL * cnorm:.3e}); the "
                "matrix equation has no solution",
                defect=defect,
            )
        zeroed = 1
        y = np.zeros((ta.shape[0], tb.shape[0]))
        y[n1, n2] = free_value
        if n2:
            y[n1:, :n2] = _trsyl(ta[n1:, n1:], b11, -(ct[n1:, :n2] + y[n1, n2] * b12.T))
        if n1:
            y[:n1, n2:] = _trsyl(a11, tb[n2:, n2:], -(ct[:n1, n2:] + a12 * y[n1, n2]))
        if n1 and n2:
            rhs = -(ct[:n1, :n2] + a12 @ y[n1:, :n2] + y[:n1, n2:] @ b12.T)
            y[:n1, :n2] = _trsyl(a11, b11, rhs)

    x = qa @ y @ qb.T
    residual = float(np.linalg.norm(a @ x + x @ b + c)) / max(1.0, cnorm)
    return x, SolveReport(residual, zeroed, defect)


def solve_standard_lyapunov(a, q):
    """Unique solution of ``a @ x + x @ a.T + q = 0`` for Hurwitz ``a``.

    Parameters
    ----------
    a : (k, k) array_like
        Matrix whose eigenvalues all have strictly negative real part.
    q : (k, k) array_like
        Symmetric matrix; the solution is symmetric PSD whenever ``q`` is PSD.

    Raises
    ------
    StabilityError
        If an eigenvalue of ``a`` lies within tolerance of or beyond the
        imaginary axis.
    """
    a = _as_square(a, "a")
    q = _as_square(q, "q")
    if a.shape != q.shape:
        raise ValueError(f"shape mismatch: a is {a.shape}, q is {q.shape}")
    tol = ZERO_EIG_RTOL * (np.linalg.norm(a, 2) if a.size else 0.0)
    eigs = np.linalg.eigvals(a)
    worst = eigs[np.argmax(eigs.real)]
    if worst.real >= -tol:
        raise StabilityError(
            f"matrix is not Hurwitz: eigenvalue {worst:.6e} has real part "
            f">= -{tol:.3e}"
        )
    x = solve_continuous_lyapunov(a, -q)
    return 0.5 * (x + x.T)


def solve_lyapunov_like(a, c, free_value=0.0):
    """Particular solution of ``a @ x + x @ a.T + c = 0`` for semistable ``a``.

    ``a`` may carry one simple real zero eigenvalue; the free component of
    the solution set is fixed by assigning ``free_value`` (default 0) to the
    free unknown in Schur coordinates.  The returned matrix is symmetric up
    to solver round-off.

    Returns
    -------
    (x, report) : (ndarray, SolveReport)

    Raises
    ------
    MultiplicityError
        If ``a`` has more than one eigenvalue at the origin, or a complex
        pair there.
    InconsistentEquationError
        If ``c`` carries mass on the singular equation beyond tolerance.
    """
    a = _as_square(a, "a")
    c = _as_square(c, "c")
    if a.shape != c.shape:
        raise ValueError(f"shape mismatch: a is {a.shape}, c is {c.shape}")
    return _solve_sylvester_core(a, a.T, c, free_value)


def solve_sylvester_like(a, b, c, free_value=0.0):
    """Particular solution of ``a @ x + x @ b + c = 0``.

    ``a`` and ``b`` may each carry one simple real zero eigenvalue (their
    only admissible eigenvalue pairing summing to zero); in that case the
    induced scalar equation is singular and handled as in
    :func:`solve_lyapunov_like`.

    Returns
    -------
    (x, report) : (ndarray, SolveReport)
    """
    a = _as_square(a, "a")
    b = _as_square(b, "b")
    c = np.asarray(c, dtype=float)
    if c.shape != (a.shape[0], b.shape[0]):
        raise ValueError(
            f"c must be {(a.shape[0], b.shape[0])} for a {a.shape} and b {b.shape}, "
            f"got {c.shape}"
        )
    if not np.isfinite(c).all():
        raise ValueError("c contains non-finite entries")
    return _solve_sylvester_core(a, b, c, free_value)
