"""Channels, sum channel gain, the SVD upper bound and the two gain maximizers."""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import line_search

from . import arch
from .errors import DimensionMismatch
from .network import DEFAULT_Z0, scattering_from_susceptance
from .numlin import svd_partition
from .sosup import ProjectionResult, project

log = logging.getLogger(__name__)

DEFAULT_PATHLOSS = {
    "d_r": 50.0 * np.sqrt(2.0),
    "d_k": 50.0 * np.sqrt(5.0),
    "l0": 1e-3,
    "d0": 1.0,
    "alpha_r": 2.0,
    "alpha_k": 2.2,
}
DEFAULT_NOISE_POWER = 1e-11


def path_loss(d, alpha, l0=1e-3, d0=1.0):
    """Large-scale power gain ``l0 * (d / d0) ** -alpha``."""
    return l0 * (d / d0) ** (-alpha)


@dataclass(frozen=True, eq=False)
class ChannelSet:
    e: np.ndarray  # N x L, BS -> RIS
    h: np.ndarray  # N x K, RIS -> users (columns h_k)
    noise_power: np.ndarray  # length K
    pathloss_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        e = np.atleast_2d(np.asarray(self.e, dtype=complex))
        h = np.atleast_2d(np.asarray(self.h, dtype=complex))
        if e.shape[0] != h.shape[0]:
            raise DimensionMismatch(f"E has {e.shape[0]} rows but H has {h.shape[0]}")
        if not (np.all(np.isfinite(e)) and np.all(np.isfinite(h))):
            raise ValueError("channel matrices must be finite")
        noise = np.broadcast_to(np.asarray(self.noise_power, dtype=float), (h.shape[1],)).copy()
        object.__setattr__(self, "e", e)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "noise_power", noise)

    @property
    def n(self):
        return self.e.shape[0]

    @property
    def l(self):  # noqa: E743
        return self.e.shape[1]

    @property
    def k(self):
        return self.h.shape[1]

    def effective(self, theta):
        """Cascaded channel ``H^H theta E`` (K x L); row k is ``f_k^H``."""
        return self.h.conj().T @ theta @ self.e


def _crandn(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def gen_channels(n, l, k, seed=None, noise_power=DEFAULT_NOISE_POWER, **overrides):  # noqa: E741
    """Rayleigh channels scaled by distance-based path loss.

    ``seed`` may be an int, a ``numpy.random.Generator`` or a ``SeedSequence``.
    ``overrides`` replace entries of :data:`DEFAULT_PATHLOSS`.
    """
    if min(n, l, k) < 1:
        raise ValueError("channel dimensions must be positive")
    unknown = set(overrides) - set(DEFAULT_PATHLOSS)
    if unknown:
        raise ValueError(f"unknown path-loss overrides {sorted(unknown)}")
    meta = {**DEFAULT_PATHLOSS, **overrides}
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    pr = path_loss(meta["d_r"], meta["alpha_r"], meta["l0"], meta["d0"])
    pk = path_loss(meta["d_k"], meta["alpha_k"], meta["l0"], meta["d0"])
    e = np.sqrt(pr) * _crandn(rng, (n, l))
    h = np.sqrt(pk) * _crandn(rng, (n, k))
    return ChannelSet(e, h, noise_power, meta)


def sum_gain(channels, theta):
    theta = np.asarray(theta)
    if theta.shape != (channels.n, channels.n):
        raise DimensionMismatch(f"theta has shape {theta.shape}, channels need N={channels.n}")
    return float(np.linalg.norm(channels.effective(theta)) ** 2)


def dof(k, l, n):  # noqa: E741
    return min(k, l, n)


@dataclass(frozen=True, eq=False)
class UpperBoundAnalysis:
    m: int
    ub_value: float
    v_m: np.ndarray
    p_m: np.ndarray
    v_rest: np.ndarray
    p_rest: np.ndarray
    s_m: np.ndarray
    sigma_m: np.ndarray


def upper_bound(channels):
    """SVD bound ``||S_M Sigma_M||_F^2`` on the gain over all unitary ``theta``."""
    m = dof(channels.k, channels.l, channels.n)
    hh = svd_partition(channels.h.conj().T, m)  # H^H = U S V^H, V is N x N
    ee = svd_partition(channels.e, m)  # E = P Sigma G^H, P is N x N
    s_m, sig_m = hh.s_m, ee.s_m
    return UpperBoundAnalysis(
        m=m,
        ub_value=float(np.sum((s_m * sig_m) ** 2)),
        v_m=hh.v_m,
        p_m=ee.u_m,
        v_rest=hh.v_rest,
        p_rest=ee.u_rest,
        s_m=s_m,
        sigma_m=sig_m,
    )


def theta_star(analysis, x0=None):
    """Relaxed optimum ``V_M P_M^H + V_rest X0 P_rest^H``; ``x0=None`` means zero."""
    theta = analysis.v_m @ analysis.p_m.conj().T
    rest = analysis.v_rest.shape[1]
    if x0 is not None and rest:
        x0 = np.asarray(x0)
        if x0.shape != (rest, rest):
            raise DimensionMismatch(f"x0 must be {rest}x{rest}, got {x0.shape}")
        theta = theta + analysis.v_rest @ x0 @ analysis.p_rest.conj().T
    return theta


def prop1_defect(channels, analysis=None):
    """``||L - L^T||_F`` for ``L = P_M^H conj(V_M)``; zero iff the relaxed optimum can be symmetric."""
    a = analysis or upper_bound(channels)
    lam = a.p_m.conj().T @ a.v_m.conj()
    return float(np.linalg.norm(lam - lam.T))


@dataclass(frozen=True, eq=False)
class GainResult:
    projection: ProjectionResult
    gain: float
    ub: float

    @property
    def b(self):
        return self.projection.b

    @property
    def theta(self):
        return self.projection.theta


def ub_sosup(channels, spec, z0=DEFAULT_Z0):
    """Project the relaxed optimum ``V_M P_M^H`` onto the architecture."""
    analysis = upper_bound(channels)
    proj = project(theta_star(analysis), spec, z0)
    return GainResult(proj, sum_gain(channels, proj.theta), analysis.ub_value)


def _maps(spec_or_maps):
    if isinstance(spec_or_maps, arch.StructureMaps):
        return spec_or_maps
    return arch.transform_matrix(spec_or_maps)


def _objective_and_gradient(b_vec, channels, maps, z0, need_grad=True):
    n = maps.n
    b = maps.expand(b_vec)
    m_inv = np.linalg.inv(np.eye(n) + 1j * z0 * b)
    theta = 2.0 * m_inv - np.eye(n)
    hh = channels.h.conj().T
    g = hh @ theta @ channels.e
    f = float(np.vdot(g, g).real)
    if not need_grad:
        return f, None
    # d theta = -j z0 M^{-1} dB (I + theta);  df = Re tr(Gm dB)
    y = channels.e @ g.conj().T @ hh
    gm = (-2j * z0) * ((np.eye(n) + theta) @ y @ m_inv)
    rows, cols, var = maps.entry_positions
    grad = np.bincount(var, weights=gm[cols, rows].real, minlength=maps.n_b)
    return f, grad


def gain_objective(b_vec, channels, spec, z0=DEFAULT_Z0):
    """Sum channel gain as a function of the independent susceptance variables."""
    return _objective_and_gradient(b_vec, channels, _maps(spec), z0, need_grad=False)[0]


def gain_gradient(b_vec, channels, spec, z0=DEFAULT_Z0):
    return _objective_and_gradient(b_vec, channels, _maps(spec), z0)[1]


@dataclass(frozen=True, eq=False)
class QuasiNewtonResult:
    b: np.ndarray
    objective_trace: list
    iterations: int
    converged: bool
    line_search_failed: bool = False

    @property
    def objective(self):
        return self.objective_trace[-1]


def quasi_newton_gain(
    channels,
    spec,
    b_init,
    z0=DEFAULT_Z0,
    max_iter=500,
    memory=10,
    c1=1e-4,
    c2=0.9,
    gtol=1e-6,
):
    """Limited-memory BFGS ascent on the sum channel gain.

    The problem is solved in normalized coordinates ``u = z0 * b`` with the
    objective divided by its starting value, so the stopping rule
    ``max|grad| < gtol * max(1, |objective|)`` is independent of the path-loss
    scale. ``objective_trace`` reports the unnormalized gain per iteration.
    """
    maps = _maps(spec)
    b0 = np.asarray(b_init, dtype=float).ravel()
    if b0.size != maps.n_b:
        raise DimensionMismatch(f"b_init has {b0.size} entries, architecture needs {maps.n_b}")
    f0 = gain_objective(b0, channels, maps, z0)
    scale = f0 if f0 > 0 else 1.0

    def neg(u):
        f, g = _objective_and_gradient(u / z0, channels, maps, z0)
        return -f / scale, -g / (scale * z0)

    cache = {}

    def fun(u):
        key = u.tobytes()
        if key not in cache:
            cache.clear()
            cache[key] = neg(u)
        return cache[key][0]

    def jac(u):
        fun(u)
        return cache[u.tobytes()][1]

    u = b0 * z0
    fu, gu = neg(u)
    trace = [f0]
    s_hist, y_hist = [], []
    old_old = None
    converged = failed = False
    it = 0
    for it in range(1, max_iter + 1):
        if np.max(np.abs(gu), initial=0.0) < gtol * max(1.0, abs(fu)):
            converged = True
            it -= 1
            break
        d = _two_loop(gu, s_hist, y_hist)
        if np.dot(d, gu) >= 0:
            s_hist.clear()
            y_hist.clear()
            d = -gu
        alpha, *_, new_f, _, new_g = line_search(
            fun, jac, u, d, gfk=gu, old_fval=fu, old_old_fval=old_old, c1=c1, c2=c2, maxiter=50
        )
        if alpha is None and (s_hist or old_old is not None):
            # retry along steepest descent with a fresh memory
            s_hist.clear()
            y_hist.clear()
            d = -gu
            alpha, *_, new_f, _, new_g = line_search(
                fun, jac, u, d, gfk=gu, old_fval=fu, c1=c1, c2=c2, maxiter=50
            )
        if alpha is None or new_f is None or new_f > fu:
            failed = True
            log.warning("line search failed at iteration %d; returning best iterate", it)
            it -= 1
            break
        u_new = u + alpha * d
        if new_g is None:
            new_g = jac(u_new)
        s, y = u_new - u, new_g - gu
        if np.dot(s, y) > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            s_hist.append(s)
            y_hist.append(y)
            if len(s_hist) > memory:
                s_hist.pop(0)
                y_hist.pop(0)
        old_old, fu, gu, u = fu, new_f, new_g, u_new
        trace.append(-fu * scale)
        if fu == old_old:
            converged = True
            break
    return QuasiNewtonResult(u / z0, trace, it, converged, failed)


def _two_loop(grad, s_hist, y_hist):
    q = grad.copy()
    alphas = []
    for s, y in zip(reversed(s_hist), reversed(y_hist)):
        rho = 1.0 / np.dot(y, s)
        a = rho * np.dot(s, q)
        alphas.append((rho, a))
        q -= a * y
    if s_hist:
        s, y = s_hist[-1], y_hist[-1]
        q *= np.dot(s, y) / np.dot(y, y)
    for (s, y), (rho, a) in zip(zip(s_hist, y_hist), reversed(alphas)):
        b = rho * np.dot(y, q)
        q += (a - b) * s
    return -q


def sosup_quasi_newton(channels, spec, z0=DEFAULT_Z0, **opts):
    """UB-based SOSUP followed by quasi-Newton refinement.

    Returns ``(initial GainResult, QuasiNewtonResult, theta)``.
    """
    init = ub_sosup(channels, spec, z0)
    maps = arch.transform_matrix(spec)
    b_init = maps.vec_i(init.b.b)
    qn = quasi_newton_gain(channels, maps, b_init, z0=z0, **opts)
    theta = scattering_from_susceptance(maps.expand(qn.b), z0)
    return init, qn, theta
