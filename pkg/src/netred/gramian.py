"""Controllability Gramians of semistable second-order networks.

The deviation-from-consensus Gramian replaces the classical controllability
Gramian, which does not exist for semistable systems.  It solves a singular
Lyapunov-type equation whose solution set is a one-parameter family; the
canonical member is fixed by requiring the consensus annihilator to lie in
its kernel, which makes it independent of the particular solution returned
by the solver.
"""

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import NumericalFailureError, UnboundedNormError
from .matrixeq import SolveReport, solve_lyapunov_like, solve_sylvester_like
from .sys2 import convergence_matrix, first_order

if TYPE_CHECKING:  # pragma: no cover
    from .reduce import ReducedModel
    from .sys2 import SecondOrderNetwork

_RESIDUAL_RTOL = 1e-8      # equation residual relative to the right-hand side
_ANNIHILATOR_RTOL = 1e-8   # |nu' P| relative to ||P||_2 ||nu||
_PSD_RTOL = 1e-8           # tolerated negative eigenvalue mass
_TRACE_CLAMP = 1e-10       # round-off negativity clamped to zero in norms


@dataclass(frozen=True)
class NetworkGramian:
    """Canonical deviation Gramian of a second-order network.

    ``p`` is the 2n-by-2n symmetric PSD Gramian, ``nu`` the consensus
    annihilator ``(D 1; M 1)`` it annihilates, ``input_mass`` the column
    sums of the input matrix (needed for H2 boundedness checks), and
    ``report`` the diagnostics of the underlying equation solve.
    """

    p: np.ndarray
    nu: np.ndarray
    input_mass: np.ndarray
    report: SolveReport


@dataclass(frozen=True)
class CouplingGramian:
    """Cross Gramian coupling a full model with one of its reductions."""

    px: np.ndarray
    report: SolveReport


def _ones_block(n, r):
    """Homogeneous-solution direction: all-ones on the position-position block."""
    pi = np.zeros((2 * n, 2 * r))
    pi[:n, :r] = 1.0
    return pi


def _consensus_weight(x, nu_left, nu_right, sigma):
    """Coefficient that cancels the annihilator component of a particular solution."""
    return -float(nu_left @ x @ nu_right) / (sigma * sigma)


def _deviation_input(real, conv):
    """Input matrix with its non-decaying consensus component removed."""
    return real.b - conv.j @ real.b


def _deviation_product(wl, wr):
    """Right-hand side ``wl @ wr.T`` of the Gramian equations.

    A same-object product would take the symmetric-rank-k BLAS kernel, whose
    accumulation order differs from the general product; copying keeps the
    Lyapunov and coupling routes bit-identical on identical inputs.
    """
    if wr is wl:
        wr = wl.copy()
    return wl @ wr.T


def network_gramian(sys):
    """Canonical deviation Gramian of a validated network.

    Solves the singular Lyapunov-type equation for a particular solution and
    shifts it along the homogeneous direction until the consensus
    annihilator lies in its kernel; the result is independent of the
    particular solution.

    Raises
    ------
    NumericalFailureError
        If the solve residual, the annihilation defect, or the negative
        eigenvalue mass of the result exceeds its tolerance.
    """
    real = first_order(sys)
    conv = convergence_matrix(sys)
    w = _deviation_input(real, conv)
    rhs = w @ w.T
    particular, report = solve_lyapunov_like(real.a, rhs)
    rhs_norm = float(np.linalg.norm(rhs))
    residual = report.residual_rel * max(1.0, rhs_norm)
    if rhs_norm > 0 and residual > _RESIDUAL_RTOL * rhs_norm:
        raise NumericalFailureError(
            f"Gramian equation residual {residual:.3e} exceeds "
            f"{_RESIDUAL_RTOL:.0e} of the right-hand side norm {rhs_norm:.3e}"
        )
    beta = _consensus_weight(particular, conv.nu, conv.nu, conv.sigma_d)
    p = particular + beta * _ones_block(sys.n, sys.n)
    p = 0.5 * (p + p.T)

    eigs = np.linalg.eigvalsh(p)
    p_scale = float(np.abs(eigs).max()) if eigs.size else 0.0
    nu_norm = float(np.linalg.norm(conv.nu))
    annihilation = float(np.linalg.norm(conv.nu @ p))
    if annihilation > _ANNIHILATOR_RTOL * p_scale * nu_norm:
        raise NumericalFailureError(
            f"canonical Gramian fails annihilation: |nu' P| = {annihilation:.3e} "
            f"vs tolerance {_ANNIHILATOR_RTOL * p_scale * nu_norm:.3e}"
        )
    if eigs.size and eigs[0] < -_PSD_RTOL * p_scale:
        raise NumericalFailureError(
            f"canonical Gramian has eigenvalue {eigs[0]:.3e}, more negative than "
            f"round-off allows ({-_PSD_RTOL * p_scale:.3e}); the solve is suspect"
        )
    return NetworkGramian(
        p=p,
        nu=conv.nu,
        input_mass=sys.f.sum(axis=0),
        report=report,
    )


def coupling_gramian(sys, red):
    """Cross Gramian between a network and its clustering-based reduction.

    Solves the Sylvester-type equation coupling the two state flows (the
    full state matrix on the left, the transposed reduced one on the right,
    with the consensus-free input product as inhomogeneity) and cancels the
    annihilator component against the reduced annihilator.
    """
    red_net = red.network
    real_f = first_order(sys)
    conv_f = convergence_matrix(sys)
    real_r = first_order(red_net)
    conv_r = convergence_matrix(red_net)
    wl = _deviation_input(real_f, conv_f)
    wr = _deviation_input(real_r, conv_r)
    rhs = wl @ wr.T
    particular, report = solve_sylvester_like(real_f.a, real_r.a.T, rhs)
    rhs_norm = float(np.linalg.norm(rhs))
    residual = report.residual_rel * max(1.0, rhs_norm)
    if rhs_norm > 0 and residual > _RESIDUAL_RTOL * rhs_norm:
        raise NumericalFailureError(
            f"coupling equation residual {residual:.3e} exceeds "
            f"{_RESIDUAL_RTOL:.0e} of the right-hand side norm {rhs_norm:.3e}"
        )
    beta = _consensus_weight(particular, conv_f.nu, conv_r.nu, conv_f.sigma_d)
    px = particular + beta * _ones_block(sys.n, red_net.n)

    px_scale = float(np.linalg.norm(px, 2)) if px.size else 0.0
    pairing = abs(float(conv_f.nu @ px @ conv_r.nu))
    bound = (
        _ANNIHILATOR_RTOL
        * max(px_scale, 1e-300)
        * float(np.linalg.norm(conv_f.nu))
        * float(np.linalg.norm(conv_r.nu))
    )
    if px_scale > 0 and pairing > bound:
        raise NumericalFailureError(
            f"coupling Gramian fails annihilator pairing: {pairing:.3e} vs "
            f"tolerance {bound:.3e}"
        )
    return CouplingGramian(px=px, report=report)


def h2_output_norm(gram, hs, hv):
    """H2 norm of the output ``(hs + s hv)`` from the deviation Gramian.

    The squared norm is the trace of ``H P H'`` with ``H = [hs, hv]``;
    round-off negativity above ``-1e-10`` is clamped to zero.

    Raises
    ------
    UnboundedNormError
        If neither the position weight annihilates the consensus direction
        nor the input decouples from it (the norm is then infinite).
    """
    hs = np.atleast_2d(np.asarray(hs, dtype=float))
    hv = np.atleast_2d(np.asarray(hv, dtype=float))
    n = gram.nu.shape[0] // 2
    if hs.shape[1] != n or hv.shape[1] != n or hs.shape[0] != hv.shape[0]:
        raise ValueError(
            f"output weights must both be p x {n}, got {hs.shape} and {hv.shape}"
        )
    hs_mass = np.abs(hs.sum(axis=1)).max() if hs.size else 0.0
    f_mass = np.abs(gram.input_mass).max() if gram.input_mass.size else 0.0
    if hs_mass > 1e-10 and f_mass > 1e-10:
        raise UnboundedNormError(
            f"position weight keeps a consensus component (|hs 1| up to "
            f"{hs_mass:.3e}) while the input couples into it (|1'F| up to "
            f"{f_mass:.3e}); the H2 norm is infinite"
        )
    h = np.hstack([hs, hv])
    value = float(np.trace(h @ gram.p @ h.T))
    if value < -_TRACE_CLAMP:
        raise NumericalFailureError(
            f"Gramian trace {value:.3e} is more negative than round-off allows"
        )
    return float(np.sqrt(max(value, 0.0)))


def spd_stiffness_gramian(m_diag, d, k, f):
    """Gramian of the asymptotically stable variant with SPD stiffness.

    Test-support branch: when the Laplacian stiffness is replaced by a
    symmetric positive-definite matrix the system is Hurwitz, the long-time
    projector vanishes, and the deviation Gramian degenerates to the
    classical controllability Gramian.  Solved through the same singular-
    capable machinery so the degeneration can be cross-checked against
    :func:`netred.matrixeq.solve_standard_lyapunov`.

    Returns ``(p, report)``.
    """
    m_diag = np.asarray(m_diag, dtype=float)
    d = np.asarray(d, dtype=float)
    k = np.asarray(k, dtype=float)
    f = np.asarray(f, dtype=float)
    n = m_diag.shape[0]
    if np.any(m_diag <= 0):
        raise ValueError("masses must be positive")
    for name, mat in (("damping", d), ("stiffness", k)):
        if mat.shape != (n, n):
            raise ValueError(f"{name} must be {n}x{n}, got {mat.shape}")
        if np.abs(mat - mat.T).max() > 1e-10 * max(1.0, np.abs(mat).max()):
            raise ValueError(f"{name} must be symmetric")
        if np.linalg.eigvalsh(0.5 * (mat + mat.T)).min() <= 0:
            raise ValueError(f"{name} must be positive definite")
    minv = 1.0 / m_diag
    a = np.zeros((2 * n, 2 * n))
    a[:n, n:] = np.eye(n)
    a[n:, :n] = -(minv[:, None] * k)
    a[n:, n:] = -(minv[:, None] * d)
    b = np.zeros((2 * n, f.shape[1]))
    b[n:, :] = minv[:, None] * f
    p, report = solve_lyapunov_like(a, b @ b.T)
    if report.singular_blocks_zeroed:
        raise NumericalFailureError(
            "SPD-stiffness system unexpectedly produced a singular equation"
        )
    return p, report
