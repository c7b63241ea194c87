"""Second-order network model: validation, realizations, and time-domain oracles.

The model is ``M x'' + D x' + L x = F u`` with diagonal positive inertia,
symmetric positive-definite damping, and a connected-graph Laplacian
stiffness.  Such systems are semistable: the first-order realization has a
single simple eigenvalue at the origin (the consensus mode) and is strictly
stable otherwise.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import (
    ConnectivityError,
    DampingMatrixError,
    MassMatrixError,
    SingularPencilError,
    StiffnessMatrixError,
    TruncationError,
    UnboundedNormError,
)

# Structural-validation tolerances, relative to the spectral norm of the
# matrix under test.
_PD_RTOL = 1e-10          # smallest damping eigenvalue must exceed this
_OFFDIAG_RTOL = 1e-12     # stiffness off-diagonals may exceed zero by this
_ROWSUM_RTOL = 1e-9       # stiffness row sums must vanish to this
_FIEDLER_RTOL = 1e-10     # connectivity: second-smallest stiffness eigenvalue
_SYM_RTOL = 1e-10

# Quadrature defaults: horizon in slowest-decay units, grid resolution in
# fastest-eigenvalue units, decay demanded of the integrand tail.
_HORIZON_DECADES = 40.0
_GRID_RESOLUTION = 0.15
_TAIL_RTOL = 1e-8
_MAX_QUADRATURE_STEPS = 500_000


@dataclass(frozen=True)
class SecondOrderNetwork:
    """Validated coefficient matrices of a second-order network system."""

    m_diag: np.ndarray
    d: np.ndarray
    l: np.ndarray
    f: np.ndarray

    @property
    def n(self):
        return self.m_diag.shape[0]

    @property
    def m(self):
        return self.f.shape[1]


@dataclass(frozen=True)
class FirstOrderRealization:
    """State matrices of the equivalent first-order system on (x, x')."""

    a: np.ndarray
    b: np.ndarray


@dataclass(frozen=True)
class ConvergenceData:
    """Long-time projector of the state flow and the consensus annihilator.

    ``j`` is the limit of the state propagator (an idempotent rank-one
    projection onto the consensus mode), ``sigma_d = 1' D 1`` its
    normalization, ``nu = (D 1; M 1)`` the left annihilator of the state
    matrix.
    """

    j: np.ndarray
    sigma_d: float
    nu: np.ndarray


@dataclass(frozen=True)
class Violation:
    """One failed structural condition with its location and magnitude."""

    condition: str
    location: str
    magnitude: float
    message: str


def _spectral_norm(a):
    return float(np.linalg.norm(a, 2)) if a.size else 0.0


def check_structure(m_diag, d, l, f):
    """List every violated structural condition of a candidate model.

    Returns an empty list when ``(m_diag, d, l, f)`` is a valid second-order
    network; shape inconsistencies raise ValueError instead of being listed.
    """
    m_diag = np.asarray(m_diag, dtype=float)
    d = np.asarray(d, dtype=float)
    l = np.asarray(l, dtype=float)
    f = np.asarray(f, dtype=float)
    if m_diag.ndim != 1:
        raise ValueError("masses must be a 1-D array of diagonal entries")
    n = m_diag.shape[0]
    if d.shape != (n, n) or l.shape != (n, n):
        raise ValueError(
            f"damping and stiffness must be {n}x{n}, got {d.shape} and {l.shape}"
        )
    if f.ndim != 2 or f.shape[0] != n:
        raise ValueError(f"input matrix must have {n} rows, got shape {f.shape}")
    for name, arr in (("masses", m_diag), ("damping", d), ("stiffness", l), ("input", f)):
        if not np.isfinite(arr).all():
            raise ValueError(f"{name} contains non-finite entries")

    violations = []

    for i in np.nonzero(m_diag <= 0)[0]:
        violations.append(
            Violation(
                "mass-positivity",
                f"entry {i + 1}",
                float(m_diag[i]),
                f"mass {i + 1} is {m_diag[i]:.6g}, must be positive",
            )
        )

    d_scale = _spectral_norm(d)
    asym = np.abs(d - d.T)
    if asym.max() > _SYM_RTOL * max(d_scale, 1e-300):
        i, j = np.unravel_index(np.argmax(asym), asym.shape)
        violations.append(
            Violation(
                "damping-symmetry",
                f"entry ({i + 1}, {j + 1})",
                float(asym[i, j]),
                f"damping is asymmetric by {asym[i, j]:.3e}",
            )
        )
    else:
        d_min = float(np.linalg.eigvalsh(0.5 * (d + d.T)).min())
        if d_min <= _PD_RTOL * d_scale:
            violations.append(
                Violation(
                    "damping-definiteness",
                    "smallest eigenvalue",
                    d_min,
                    f"damping has eigenvalue {d_min:.3e}, not positive definite",
                )
            )

    l_scale = _spectral_norm(l)
    l_asym = np.abs(l - l.T)
    if l_asym.max() > _SYM_RTOL * max(l_scale, 1e-300):
        i, j = np.unravel_index(np.argmax(l_asym), l_asym.shape)
        violations.append(
            Violation(
                "stiffness-symmetry",
                f"entry ({i + 1}, {j + 1})",
                float(l_asym[i, j]),
                f"stiffness is asymmetric by {l_asym[i, j]:.3e}",
            )
        )
    else:
        if n == 1:
            # single-vertex graphs carry the zero Laplacian; scale-relative
            # tolerances degenerate, so accept only numerically tiny values
            if abs(l[0, 0]) > 1e-9:
                violations.append(
                    Violation(
                        "stiffness-row-sum",
                        "entry (1, 1)",
                        float(l[0, 0]),
                        f"1x1 stiffness must be zero, got {l[0, 0]:.3e}",
                    )
                )
        else:
            row = np.abs(l.sum(axis=1))
            if row.max() > _ROWSUM_RTOL * l_scale:
                i = int(np.argmax(row))
                violations.append(
                    Violation(
                        "stiffness-row-sum",
                        f"row {i + 1}",
                        float(row[i]),
                        f"stiffness row {i + 1} sums to {l.sum(axis=1)[i]:.3e}",
                    )
                )
            off = l - np.diag(np.diag(l))
            if off.max() > _OFFDIAG_RTOL * l_scale:
                i, j = np.unravel_index(np.argmax(off), off.shape)
                violations.append(
                    Violation(
                        "stiffness-off-diagonal",
                        f"entry ({i + 1}, {j + 1})",
                        float(off[i, j]),
                        f"stiffness has positive off-diagonal {off[i, j]:.3e}",
                    )
                )
            eigs = np.linalg.eigvalsh(0.5 * (l + l.T))
            if eigs[1] <= _FIEDLER_RTOL * l_scale:
                violations.append(
                    Violation(
                        "stiffness-connectivity",
                        "second-smallest eigenvalue",
                        float(eigs[1]),
                        f"coupling graph is disconnected (algebraic connectivity "
                        f"{eigs[1]:.3e})",
                    )
                )
    return violations


_CONDITION_ERRORS = (
    ("mass-positivity", MassMatrixError),
    ("damping-symmetry", DampingMatrixError),
    ("damping-definiteness", DampingMatrixError),
    ("stiffness-symmetry", StiffnessMatrixError),
    ("stiffness-row-sum", StiffnessMatrixError),
    ("stiffness-off-diagonal", StiffnessMatrixError),
    ("stiffness-connectivity", ConnectivityError),
)


def validate(m_diag, d, l, f):
    """Validate coefficient matrices and return the model.

    Raises the error class of the first violated structural condition
    (mass, damping, stiffness, connectivity); the exception carries the
    full violation list.
    """
    violations = check_structure(m_diag, d, l, f)
    if violations:
        failed = {v.condition for v in violations}
        for condition, error_cls in _CONDITION_ERRORS:
            if condition in failed:
                first = next(v for v in violations if v.condition == condition)
                raise error_cls(first.message, violations=violations)
    model = SecondOrderNetwork(
        m_diag=np.array(m_diag, dtype=float),
        d=np.array(d, dtype=float),
        l=np.array(l, dtype=float),
        f=np.array(f, dtype=float),
    )
    for arr in (model.m_diag, model.d, model.l, model.f):
        arr.setflags(write=False)
    return model


def first_order(sys):
    """First-order realization ``x' = a x + b u`` on the stacked state (x, x').

    The inertia inverse is applied entrywise on the diagonal.
    """
    n = sys.n
    minv = 1.0 / sys.m_diag
    a = np.zeros((2 * n, 2 * n))
    a[:n, n:] = np.eye(n)
    a[n:, :n] = -(minv[:, None] * sys.l)
    a[n:, n:] = -(minv[:, None] * sys.d)
    b = np.zeros((2 * n, sys.m))
    b[n:, :] = minv[:, None] * sys.f
    return FirstOrderRealization(a=a, b=b)


def convergence_matrix(sys):
    """Long-time projector of the state flow, with annihilator data."""
    n = sys.n
    ones = np.ones(n)
    sigma = float(sys.d.sum())
    j = np.zeros((2 * n, 2 * n))
    j[:n, :n] = np.outer(ones, sys.d.sum(axis=0)) / sigma
    j[:n, n:] = np.outer(ones, sys.m_diag) / sigma
    nu = np.concatenate([sys.d.sum(axis=1), sys.m_diag])
    return ConvergenceData(j=j, sigma_d=sigma, nu=nu)


def eval_transfer(sys, s):
    """Transfer matrix ``(s^2 M + s D + L)^{-1} F`` at a complex point ``s``.

    Raises
    ------
    SingularPencilError
        When the quadratic pencil is singular at ``s`` (in particular at
        ``s = 0``, where the stiffness kernel makes it so).
    """
    s = complex(s)
    pencil = s * s * np.diag(sys.m_diag) + s * sys.d + sys.l
    scale = np.linalg.norm(pencil, "fro")
    with np.errstate(all="ignore"):
        cond = np.linalg.cond(pencil)
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularPencilError(
            f"quadratic pencil is singular at s = {s:.6g} "
            f"(condition number {cond:.3e})"
        )
    del scale
    return np.linalg.solve(pencil, sys.f.astype(complex))


def simulate(sys, x0=None, v0=None, u=None, t_grid=None):
    """Exact LTI trajectory of the first-order realization on a time grid.

    Parameters
    ----------
    x0, v0 : (n,) array_like or None
        Initial positions and velocities (default zero).
    u : None, "impulse", or (len(t_grid)-1, m) array_like
        ``None`` gives the free response; ``"impulse"`` the full impulse
        response matrix; an array is applied as a zero-order hold on each
        grid interval.
    t_grid : (T,) array_like
        Strictly increasing times; propagation uses the matrix exponential
        on each interval, so free and impulse responses are exact per step.

    Returns
    -------
    ndarray
        Shape ``(T, 2n)`` for free/forced responses, ``(T, 2n, m)`` for the
        impulse response.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 1 or np.any(np.diff(t) <= 0):
        raise ValueError("time grid must be 1-D and strictly increasing")
    real = first_order(sys)
    n = sys.n

    phis = {}

    def step(dt):
        if dt not in phis:
            phis[dt] = expm(real.a * dt)
        return phis[dt]

    if isinstance(u, str) and u == "impulse":
        state = expm(real.a * t[0]) @ real.b
        out = np.empty((t.size, 2 * n, sys.m))
        out[0] = state
        for k in range(1, t.size):
            state = step(float(t[k] - t[k - 1])) @ state
            out[k] = state
        return out

    x0 = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float)
    v0 = np.zeros(n) if v0 is None else np.asarray(v0, dtype=float)
    if x0.shape != (n,) or v0.shape != (n,):
        raise ValueError(f"initial conditions must have shape ({n},)")
    state = np.concatenate([x0, v0])
    out = np.empty((t.size, 2 * n))
    out[0] = state
    if u is None:
        for k in range(1, t.size):
            state = step(float(t[k] - t[k - 1])) @ state
            out[k] = state
        return out

    u = np.asarray(u, dtype=float)
    if u.shape != (t.size - 1, sys.m):
        raise ValueError(
            f"input samples must have shape {(t.size - 1, sys.m)}, got {u.shape}"
        )
    # zero-order hold: the augmented exponential yields the exact interval map
    aug = np.zeros((2 * n + sys.m, 2 * n + sys.m))
    aug[: 2 * n, : 2 * n] = real.a
    aug[: 2 * n, 2 * n :] = real.b
    augs = {}
    for k in range(1, t.size):
        dt = float(t[k] - t[k - 1])
        if dt not in augs:
            augs[dt] = expm(aug * dt)
        e = augs[dt]
        state = e[: 2 * n, : 2 * n] @ state + e[: 2 * n, 2 * n :] @ u[k - 1]
        out[k] = state
    return out


def _realization_triple(system):
    """Accept a SecondOrderNetwork or an explicit ``(a, b, j)`` triple."""
    if isinstance(system, SecondOrderNetwork):
        real = first_order(system)
        conv = convergence_matrix(system)
        return real.a, real.b, conv.j, system
    a, b, j = system
    return (
        np.asarray(a, dtype=float),
        np.asarray(b, dtype=float),
        np.asarray(j, dtype=float),
        None,
    )


def _quadrature_grid(a, t_max, steps):
    """Time grid and composite-Simpson weights resolving the spectrum of ``a``."""
    eigs = np.linalg.eigvals(a)
    tol = 1e-9 * _spectral_norm(a)
    stable = eigs[eigs.real < -tol]
    if stable.size == 0:
        raise ValueError("state matrix has no strictly stable part to integrate")
    gap = float(-stable.real.max())
    speed = float(np.abs(eigs).max())
    if t_max is None:
        t_max = _HORIZON_DECADES / gap
    if steps is None:
        steps = max(2000, int(np.ceil(t_max * speed / _GRID_RESOLUTION)))
        steps += steps % 2
        if steps > _MAX_QUADRATURE_STEPS:
            raise ValueError(
                f"system too stiff for the default quadrature grid "
                f"({steps} steps needed); pass t_max/steps explicitly"
            )
    if steps % 2 or steps < 2:
        raise ValueError(f"steps must be a positive even number, got {steps}")
    ts = np.linspace(0.0, float(t_max), steps + 1)
    weights = np.ones(steps + 1)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    weights *= (ts[1] - ts[0]) / 3.0
    return ts, weights


def _deviation_response(a, b, j, ts, chunk=8192):
    """Yield chunks of ``(e^{a t} - j) b`` over the grid ``ts``.

    Uses a spectral decomposition when the state matrix is comfortably
    diagonalizable, falling back to stepping with the interval exponential.
    """
    jb = j @ b
    use_eig = False
    try:
        w, v = np.linalg.eig(a)
        if np.linalg.cond(v) < 1e10:
            c = np.linalg.solve(v, b.astype(complex))
            use_eig = True
    except np.linalg.LinAlgError:
        pass
    if use_eig:
        for start in range(0, ts.size, chunk):
            tc = ts[start : start + chunk]
            modes = np.exp(np.multiply.outer(tc, w))
            yield np.einsum("ik,tk,km->tim", v, modes, c).real - jb
        return
    phi = expm(a * (ts[1] - ts[0]))
    state = expm(a * ts[0]) @ b if ts[0] != 0.0 else b.copy()
    buf = []
    for k in range(ts.size):
        if k:
            state = phi @ state
        buf.append(state - jb)
        if len(buf) == chunk:
            yield np.array(buf)
            buf = []
    if buf:
        yield np.array(buf)


def h2_quadrature(system, hs, hv, t_max=None, steps=None):
    """H2 norm of the output ``(hs + s hv)`` response by time quadrature.

    Integrates the squared Frobenius norm of
    ``g(t) = [hs, hv] (e^{a t} - j) b`` with composite Simpson weights on a
    uniform grid, entirely independent of the Gramian solvers, so it serves
    as their cross-check.

    Parameters
    ----------
    system : SecondOrderNetwork or (a, b, j) triple
        The realization to integrate; a triple allows error-system and
        coupled realizations.
    hs, hv : (p, n) array_like
        Output weights on positions and velocities (stacked state halves
        for a triple).
    t_max, steps : optional
        Horizon and even Simpson step count; defaults resolve the spectrum
        and run to 40 slowest-decay time constants.

    Raises
    ------
    UnboundedNormError
        If the output does not decay (the norm is infinite).
    TruncationError
        If the integrand has not decayed to ``1e-8`` of its peak at
        ``t_max``.
    """
    a, b, j, model = _realization_triple(system)
    hs = np.atleast_2d(np.asarray(hs, dtype=float))
    hv = np.atleast_2d(np.asarray(hv, dtype=float))
    half = a.shape[0] // 2
    if hs.shape[1] != half or hv.shape[1] != half or hs.shape[0] != hv.shape[0]:
        raise ValueError(
            f"output weights must both be p x {half}, got {hs.shape} and {hv.shape}"
        )
    h = np.hstack([hs, hv])

    if model is not None:
        hs_mass = np.abs(hs.sum(axis=1)).max() if hs.size else 0.0
        f_mass = np.abs(model.f.sum(axis=0)).max() if model.f.size else 0.0
        if hs_mass > 1e-10 and f_mass > 1e-10:
            raise UnboundedNormError(
                "output weight on positions does not annihilate the consensus "
                f"direction (|hs 1| up to {hs_mass:.3e}) and the input couples "
                f"into it (|1'F| up to {f_mass:.3e}); the H2 norm is infinite"
            )
    else:
        drift = np.linalg.norm(h @ j @ b)
        if drift > 1e-8 * max(1.0, np.linalg.norm(h) * np.linalg.norm(b)):
            raise UnboundedNormError(
                f"output retains a non-decaying component of size {drift:.3e}"
            )

    ts, weights = _quadrature_grid(a, t_max, steps)
    total = 0.0
    peak = 0.0
    last = 0.0
    pos = 0
    for block in _deviation_response(a, b, j, ts):
        g = np.einsum("pi,tim->tpm", h, block)
        norms = np.einsum("tpm,tpm->t", g, g)
        total += float(weights[pos : pos + g.shape[0]] @ norms)
        peak = max(peak, float(np.sqrt(norms.max(initial=0.0))))
        last = float(np.sqrt(norms[-1]))
        pos += g.shape[0]
    # responses that never rise above round-off noise integrate to zero and
    # carry no meaningful tail
    noise_floor = 1e-12 * max(1.0, np.linalg.norm(h) * np.linalg.norm(b))
    if peak > noise_floor and last > _TAIL_RTOL * peak:
        raise TruncationError(
            f"integrand has only decayed to {last:.3e} of peak {peak:.3e} at "
            f"t_max={ts[-1]:.3g}; extend the horizon",
            tail=last / peak,
        )
    return float(np.sqrt(max(total, 0.0)))


def gramian_quadrature(a, b, j, t_max=None, steps=None):
    """Deviation Gramian ``int (e^{at}-j) b b' (e^{a't}-j') dt`` by Simpson.

    Same grid machinery as :func:`h2_quadrature`; used as the independent
    reference for the matrix-equation route.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    j = np.asarray(j, dtype=float)
    ts, weights = _quadrature_grid(a, t_max, steps)
    acc = np.zeros((a.shape[0], a.shape[0]))
    peak = 0.0
    last = 0.0
    pos = 0
    for block in _deviation_response(a, b, j, ts):
        wc = weights[pos : pos + block.shape[0]]
        acc += np.einsum("t,tim,tjm->ij", wc, block, block)
        norms = np.sqrt(np.einsum("tim,tim->t", block, block))
        peak = max(peak, float(norms.max(initial=0.0)))
        last = float(norms[-1])
        pos += block.shape[0]
    noise_floor = 1e-12 * max(1.0, np.linalg.norm(b))
    if peak > noise_floor and last > _TAIL_RTOL * peak:
        raise TruncationError(
            f"integrand has only decayed to {last:.3e} of peak {peak:.3e} at "
            f"t_max={ts[-1]:.3g}; extend the horizon",
            tail=last / peak,
        )
    return 0.5 * (acc + acc.T)
