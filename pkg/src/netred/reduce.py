"""Clustering-based projection to a reduced network and its exact H2 error.

Projecting with the characteristic matrix of a partition keeps the reduced
model a valid second-order network on a reconstructible quotient graph; the
approximation error between full and reduced models is an exact trace
formula in the full, reduced, and coupling Gramians.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ModelStructureError, NumericalFailureError
from .gramian import coupling_gramian, network_gramian
from .network import CharacteristicMatrix, characteristic_matrix, graph_from_laplacian
from .sys2 import convergence_matrix, first_order, validate

_TRACE_CLAMP = 1e-10


@dataclass(frozen=True)
class ReducedModel:
    """Projected second-order network together with its clustering data.

    ``m_hat`` holds the diagonal of the reduced inertia (the cluster mass
    sums); ``network`` is the validated reduced model and ``graph`` the
    reconstructed quotient coupling graph.
    """

    m_hat: np.ndarray
    d_hat: np.ndarray
    l_hat: np.ndarray
    f_hat: np.ndarray
    p: CharacteristicMatrix
    partition: object
    network: object
    graph: object

    @property
    def r(self):
        return self.m_hat.shape[0]


@dataclass(frozen=True)
class ErrorSystem:
    """Block realization of the difference between a model and its reduction.

    ``c_e`` selects the position mismatch ``x - P z``, ``c_e_velocity`` the
    velocity mismatch; ``j_e`` is the block long-time projector used by the
    quadrature oracle.
    """

    a_e: np.ndarray
    b_e: np.ndarray
    c_e: np.ndarray
    c_e_velocity: np.ndarray
    j_e: np.ndarray


def project(sys, partition):
    """Reduce a network by aggregating the clusters of a partition.

    The reduced matrices are the congruence transforms by the partition's
    characteristic matrix; the reduced inertia is diagonal with the cluster
    mass sums.  The result is validated against the full structural
    conditions and its coupling graph reconstructed.
    """
    cm = characteristic_matrix(partition, sys.n)
    p = cm.p
    m_hat = np.array(
        [sys.m_diag[np.asarray(cluster) - 1].sum() for cluster in partition.clusters]
    )
    d_hat = p.T @ sys.d @ p
    l_hat = p.T @ sys.l @ p
    f_hat = p.T @ sys.f
    try:
        network = validate(m_hat, d_hat, l_hat, f_hat)
    except ModelStructureError as exc:
        raise NumericalFailureError(
            f"projection of a valid network produced an invalid reduced model "
            f"(internal error): {exc}"
        ) from exc
    graph = graph_from_laplacian(l_hat)
    return ReducedModel(
        m_hat=m_hat,
        d_hat=d_hat,
        l_hat=l_hat,
        f_hat=f_hat,
        p=cm,
        partition=partition,
        network=network,
        graph=graph,
    )


def reduced_first_order(red):
    """First-order realization and convergence data of the reduced model.

    The reduced normalization ``1' D_hat 1`` equals the original ``1' D 1``
    (the congruence preserves the total damping mass), so the projector is
    built directly from the reduced matrices.
    """
    return first_order(red.network), convergence_matrix(red.network)


def error_system(sys, red):
    """Block realization whose output is the (position or velocity) mismatch."""
    real_f = first_order(sys)
    real_r = first_order(red.network)
    conv_f = convergence_matrix(sys)
    conv_r = convergence_matrix(red.network)
    n, r = sys.n, red.r
    two_n, two_r = 2 * n, 2 * r
    a_e = np.zeros((two_n + two_r, two_n + two_r))
    a_e[:two_n, :two_n] = real_f.a
    a_e[two_n:, two_n:] = real_r.a
    b_e = np.vstack([real_f.b, real_r.b])
    j_e = np.zeros_like(a_e)
    j_e[:two_n, :two_n] = conv_f.j
    j_e[two_n:, two_n:] = conv_r.j
    p = red.p.p
    c_e = np.hstack([np.eye(n), np.zeros((n, n)), -p, np.zeros((n, r))])
    c_e_velocity = np.hstack([np.zeros((n, n)), np.eye(n), np.zeros((n, r)), -p])
    return ErrorSystem(a_e=a_e, b_e=b_e, c_e=c_e, c_e_velocity=c_e_velocity, j_e=j_e)


def approximation_error_h2(sys, red, variant="position", gramian=None):
    """Exact H2 norm of the mismatch between a network and its reduction.

    Assembles the error-system Gramian from the full Gramian (pass a
    precomputed one through ``gramian`` to amortize sweeps), the reduced
    Gramian, and the coupling Gramian, then evaluates the mismatch trace;
    round-off negativity above ``-1e-10`` is clamped to zero.

    Parameters
    ----------
    variant : "position" | "velocity"
        Whether the mismatch compares positions or velocities.
    """
    if variant not in ("position", "velocity"):
        raise ValueError(f"variant must be 'position' or 'velocity', got {variant!r}")
    full = gramian if gramian is not None else network_gramian(sys)
    reduced = network_gramian(red.network)
    coupling = coupling_gramian(sys, red)
    pe = np.block([[full.p, coupling.px], [coupling.px.T, reduced.p]])

    n, r = sys.n, red.r
    p = red.p.p
    if variant == "position":
        ce = np.hstack([np.eye(n), np.zeros((n, n)), -p, np.zeros((n, r))])
    else:
        ce = np.hstack([np.zeros((n, n)), np.eye(n), np.zeros((n, r)), -p])
    value = float(np.trace(ce @ pe @ ce.T))
    if value < -_TRACE_CLAMP:
        raise NumericalFailureError(
            f"error trace {value:.3e} is more negative than round-off allows; "
            "the Gramian blocks are inconsistent"
        )
    return float(np.sqrt(max(value, 0.0)))
