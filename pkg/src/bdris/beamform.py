"""Active beamforming: rates, utilities, a fractional-programming WSR precoder
and the two-stage passive/active design.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import arch
from .chanopt import quasi_newton_gain, sum_gain, ub_sosup
from .errors import DimensionMismatch
from .network import DEFAULT_Z0, Susceptance, scattering_from_susceptance
from .sosup import project

DEFAULT_P_T = 1.0
DEFAULT_ETA = 1.0
DEFAULT_P_CIR = 1.0
STAGE1_METHODS = ("ub_sosup", "sosup_qn", "heuristic_sosup")


@dataclass(frozen=True, eq=False)
class Precoder:
    w: np.ndarray  # L x K
    p_t: float
    wsr_trace: list = field(default_factory=list)
    iterations: int = 0

    def __post_init__(self):
        power = float(np.linalg.norm(self.w) ** 2)
        if power > self.p_t * (1 + 1e-9):
            raise ValueError(f"precoder power {power} exceeds budget {self.p_t}")

    @property
    def power(self):
        return float(np.linalg.norm(self.w) ** 2)


@dataclass(frozen=True, eq=False)
class UtilityReport:
    rates: np.ndarray
    wsr: float
    mmf: float
    ee: float
    weights: np.ndarray
    eta: float
    p_cir: float


def _sinr_parts(f_h, w, noise):
    """Signal and interference-plus-noise powers from ``f_h = H^H theta E`` (K x L)."""
    gains = np.abs(f_h @ w) ** 2  # [k, j] = |f_k^H w_j|^2
    signal = np.diag(gains).copy()
    interf = gains.sum(axis=1) - signal + noise
    return signal, interf


def rates_from_effective(f_h, w, noise):
    signal, interf = _sinr_parts(f_h, w, noise)
    return np.log2(1.0 + signal / interf)


def rates(channels, theta, precoder):
    w = precoder.w if isinstance(precoder, Precoder) else np.asarray(precoder)
    if w.shape != (channels.l, channels.k):
        raise DimensionMismatch(f"precoder must be {channels.l}x{channels.k}, got {w.shape}")
    theta = np.asarray(theta)
    if theta.shape != (channels.n, channels.n):
        raise DimensionMismatch(f"theta has shape {theta.shape}, channels need N={channels.n}")
    return rates_from_effective(channels.effective(theta), w, channels.noise_power)


def utilities(rates_, weights=None, precoder=None, eta=DEFAULT_ETA, p_cir=DEFAULT_P_CIR):
    if eta <= 0 or p_cir < 0:
        raise ValueError("need eta > 0 and p_cir >= 0")
    r = np.asarray(rates_, dtype=float)
    weights = np.ones_like(r) if weights is None else np.asarray(weights, dtype=float)
    wsr = float(np.dot(weights, r))
    if precoder is None:
        power = 0.0
    elif isinstance(precoder, Precoder):
        power = precoder.power
    else:
        power = float(np.linalg.norm(precoder) ** 2)
    denom = power / eta + p_cir
    ee = wsr / denom if denom > 0 else 0.0
    return UtilityReport(r, wsr, float(r.min()) if r.size else 0.0, ee, weights, eta, p_cir)


def matched_filter(f_h, p_t):
    """Per-user matched filter with equal power split."""
    k = f_h.shape[0]
    w = f_h.conj().T.copy()
    norms = np.linalg.norm(w, axis=0)
    norms[norms == 0] = 1.0
    return w / norms * np.sqrt(p_t / k)


def _power_constrained_solve(a, rhs, p_t):
    """Minimize ``tr(W^H A W) - 2 Re tr(W^H rhs)`` subject to ``||W||_F^2 <= p_t``.

    ``W = (A + mu I)^{-1} rhs`` with the smallest ``mu >= 0`` meeting the budget.
    """
    lam, u = np.linalg.eigh(a)
    lam = np.clip(lam, 0.0, None)
    proj = u.conj().T @ rhs
    weight = np.sum(np.abs(proj) ** 2, axis=1)
    active = lam > 1e-14 * max(lam.max(initial=0.0), 1e-300)
    # right-hand side components in the null space of A force mu > 0
    needs_mu = bool(np.any(weight[~active] > 1e-24 * max(weight.sum(), 1e-300)))
    if not needs_mu:
        keep = active
        lam_k, w_k = lam[keep], weight[keep]
        if np.sum(w_k / lam_k**2) <= p_t:
            coef = np.zeros_like(proj)
            coef[keep] = proj[keep] / lam_k[:, None]
            return u @ coef
        lo = 0.0
    else:
        keep = np.ones_like(active)
        lam_k, w_k = lam, weight
        lo = 1e-300

    def excess(mu):
        return float(np.sum(w_k / (lam_k + mu) ** 2)) - p_t

    hi = max(np.sqrt(weight.sum() / p_t), 1e-300)
    while excess(hi) > 0:
        hi *= 2.0
    if needs_mu:
        lo = hi
        while excess(lo) <= 0:
            lo *= 0.5
    mu = brentq(excess, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps)
    coef = np.zeros_like(proj)
    coef[keep] = proj[keep] / (lam_k + mu)[:, None]
    w = u @ coef
    norm2 = np.linalg.norm(w) ** 2
    if norm2 > p_t:
        w *= np.sqrt(p_t / norm2)
    return w


def fp_wsr_precoder(channels, theta, p_t=DEFAULT_P_T, weights=None, max_iter=300, tol=1e-4, w_init=None):
    """Weighted sum-rate precoder by the quadratic-transform FP method.

    Each iteration sets the auxiliary SINRs ``gamma`` to the current SINRs,
    the quadratic-transform variables ``y_k`` to their closed-form optimum,
    then solves for ``W`` in closed form with a bisected power multiplier.
    Every step is a block ascent on the same surrogate, so the WSR is
    non-decreasing. Stops when the relative WSR change drops below ``tol``.
    """
    if p_t <= 0:
        raise ValueError("power budget must be positive")
    f_h = channels.effective(np.asarray(theta))
    k = channels.k
    noise = channels.noise_power
    delta = np.ones(k) if weights is None else np.asarray(weights, dtype=float)
    w = matched_filter(f_h, p_t) if w_init is None else np.asarray(w_init, dtype=complex)

    def wsr(w_):
        return float(np.dot(delta, rates_from_effective(f_h, w_, noise)))

    trace = [wsr(w)]
    it = 0
    for it in range(1, max_iter + 1):
        signal, interf = _sinr_parts(f_h, w, noise)
        gamma = signal / interf
        total = interf + signal
        amp = np.sqrt(delta * (1.0 + gamma))
        y = amp * np.einsum("kl,lk->k", f_h, w) / total
        # A = sum_j |y_j|^2 f_j f_j^H, rhs_k = amp_k y_k f_k
        f = f_h.conj().T  # L x K, column k is f_k
        a = (f * np.abs(y) ** 2) @ f.conj().T
        rhs = f * (amp * y)
        w_new = _power_constrained_solve(a, rhs, p_t)
        w = w_new
        trace.append(wsr(w))
        if abs(trace[-1] - trace[-2]) <= tol * max(abs(trace[-2]), 1e-300):
            break
    return Precoder(w, p_t, trace, it)


@dataclass(frozen=True, eq=False)
class TwoStageResult:
    susceptance: Susceptance
    theta: np.ndarray
    precoder: Precoder
    report: UtilityReport
    stage1_gain: float
    method: str


def heuristic_initializer(channels):
    """``H I_{KxL} E^H`` (N x N), the dimension-consistent reading of the heuristic initializer."""
    k, l = channels.k, channels.l  # noqa: E741
    eye = np.eye(k, l)
    return channels.h @ eye @ channels.e.conj().T


def stage1(channels, spec, z0=DEFAULT_Z0, method="ub_sosup", **qn_opts):
    """Passive design; returns ``(Susceptance, theta)``."""
    if method == "ub_sosup":
        res = ub_sosup(channels, spec, z0)
        return res.b, res.theta
    if method == "sosup_qn":
        init = ub_sosup(channels, spec, z0)
        maps = arch.transform_matrix(spec)
        qn = quasi_newton_gain(channels, maps, maps.vec_i(init.b.b), z0=z0, **qn_opts)
        sus = Susceptance(maps.expand(qn.b), spec)
        return sus, scattering_from_susceptance(sus, z0)
    if method == "heuristic_sosup":
        proj = project(heuristic_initializer(channels), spec, z0)
        return proj.b, proj.theta
    raise ValueError(f"unknown stage-1 method {method!r}; choose from {STAGE1_METHODS}")


def two_stage(
    channels,
    spec,
    z0=DEFAULT_Z0,
    stage1_method="ub_sosup",
    p_t=DEFAULT_P_T,
    weights=None,
    eta=DEFAULT_ETA,
    p_cir=DEFAULT_P_CIR,
    fp_opts=None,
    qn_opts=None,
):
    sus, theta = stage1(channels, spec, z0, stage1_method, **(qn_opts or {}))
    prec = fp_wsr_precoder(channels, theta, p_t, weights, **(fp_opts or {}))
    r = rates(channels, theta, prec)
    report = utilities(r, weights, prec, eta, p_cir)
    return TwoStageResult(sus, theta, prec, report, sum_gain(channels, theta), stage1_method)
