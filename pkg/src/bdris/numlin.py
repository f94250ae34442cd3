"""Dense linear-algebra kernels: Takagi factorization, SVD partitioning,
structured least squares and Kronecker products.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import DecompositionFailure, DimensionMismatch, NotSymmetric

DEFAULT_RANK_TOL = 1e-9
CLUSTER_GAP = 1e-8


@dataclass(frozen=True)
class TakagiFactors:
    """``a = q_full @ diag(sigma) @ q_full.T`` with unitary ``q_full``."""

    q_full: np.ndarray
    sigma: np.ndarray
    rank: int

    @property
    def q_r(self):
        return self.q_full[:, : self.rank]

    @property
    def sigma_r(self):
        return self.sigma[: self.rank]

    def reconstruct(self):
        return (self.q_full * self.sigma) @ self.q_full.T


def _principal_sqrt_phase(d):
    # halves the argument into (-pi/2, pi/2]
    ang = np.angle(d)
    ang = np.where(np.isclose(ang, -np.pi, atol=1e-15, rtol=0.0), np.pi, ang)
    return np.exp(0.5j * ang)


def _takagi_block(w):
    """Takagi vectors of a small symmetric matrix with (near) equal singular values.

    Uses the real symmetric embedding ``[[Re w, Im w], [Im w, -Re w]]`` whose
    positive eigenpairs ``(s, [x; y])`` give Takagi pairs ``(s, x + i y)``.
    """
    m = w.shape[0]
    x, y = w.real, w.imag
    emb = np.block([[x, y], [y, -x]])
    emb = 0.5 * (emb + emb.T)
    vals, vecs = np.linalg.eigh(emb)
    top = vecs[:, ::-1][:, :m]
    return top[:m] + 1j * top[m:]


def _canonical_signs(q):
    """Flip column signs so each column's dominant entry has argument in (-pi/2, pi/2]."""
    idx = np.argmax(np.abs(q) - 1e-12 * np.arange(q.shape[0])[:, None], axis=0)
    lead = q[idx, np.arange(q.shape[1])]
    ang = np.angle(lead)
    flip = (ang <= -np.pi / 2 + 1e-12) | (ang > np.pi / 2 + 1e-12)
    return q * np.where(flip, -1.0, 1.0)


def _clusters(s):
    """Index runs of descending ``s`` whose consecutive gaps fall under CLUSTER_GAP * s[0]."""
    if s.size == 0:
        return []
    scale = s[0] if s[0] > 0 else 1.0
    runs, start = [], 0
    for i in range(1, s.size):
        if s[i - 1] - s[i] >= CLUSTER_GAP * scale:
            runs.append(np.arange(start, i))
            start = i
    runs.append(np.arange(start, s.size))
    return runs


def takagi(a, rank_tol=DEFAULT_RANK_TOL):
    """Takagi factorization of a complex symmetric matrix.

    Computes ``a = Q diag(sigma) Q^T`` from the SVD ``a = U S V^H`` by phase
    correction ``Q = U D^{1/2}`` with ``D = U^H a conj(U)``. Inside clusters of
    (numerically) equal singular values ``D`` is not diagonal, so each cluster
    block is factorized separately.

    Parameters
    ----------
    a : ndarray, shape (n, n)
        Complex symmetric input.
    rank_tol : float
        Singular values at or above ``rank_tol * sigma[0]`` count toward the rank.

    Returns
    -------
    TakagiFactors
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"takagi needs a square matrix, got shape {a.shape}")
    n = a.shape[0]
    norm_a = np.linalg.norm(a)
    if np.linalg.norm(a - a.T) > 1e-8 * max(1.0, norm_a):
        raise NotSymmetric("input to takagi is not complex symmetric")
    if n == 0:
        return TakagiFactors(np.zeros((0, 0), complex), np.zeros(0), 0)

    u, s, _ = np.linalg.svd(a)
    q = np.empty_like(u)
    zero_level = max(n, 1) * np.finfo(float).eps * (s[0] if s[0] > 0 else 1.0)
    for run in _clusters(s):
        uj = u[:, run]
        if s[run[0]] <= zero_level:
            q[:, run] = uj
            continue
        w = uj.conj().T @ a @ uj.conj()
        if run.size == 1:
            phase = w[0, 0] / abs(w[0, 0])
            q[:, run] = uj * _principal_sqrt_phase(phase)
        else:
            q[:, run] = uj @ _takagi_block(0.5 * (w + w.T))
    q = _canonical_signs(q)

    err = np.linalg.norm((q * s) @ q.T - a)
    if err > 1e-6 * max(norm_a, np.finfo(float).tiny):
        raise DecompositionFailure(f"Takagi reconstruction error {err:.3e} too large")

    rank = int(np.count_nonzero(s >= rank_tol * s[0])) if s[0] > 0 else 0
    return TakagiFactors(q, s, rank)


@dataclass(frozen=True)
class SVDPartition:
    """Full SVD ``a = u @ diag(s) @ vh`` split at the leading ``m`` singular triplets."""

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray
    m: int

    @property
    def u_m(self):
        return self.u[:, : self.m]

    @property
    def u_rest(self):
        return self.u[:, self.m :]

    @property
    def v_m(self):
        return self.v[:, : self.m]

    @property
    def v_rest(self):
        return self.v[:, self.m :]

    @property
    def s_m(self):
        return self.s[: self.m]


def svd_partition(a, m):
    a = np.asarray(a)
    if a.ndim != 2:
        raise DimensionMismatch("svd_partition needs a 2-D array")
    if not 1 <= m <= min(a.shape):
        raise DimensionMismatch(f"m={m} outside [1, {min(a.shape)}] for shape {a.shape}")
    u, s, vh = np.linalg.svd(a, full_matrices=True)
    return SVDPartition(u, s, vh.conj().T, int(m))


def least_squares(a, z, rank_rtol=None):
    """Minimum-norm least-squares solution of ``a x = z``.

    LAPACK ``gelsy``: a column-pivoted QR followed by a complete orthogonal
    decomposition, so rank-deficient and wide systems get the minimum-norm
    solution. Singular values below ``rank_rtol`` times the largest are
    treated as zero (default ``max(m, n) * eps``).

    Returns
    -------
    x : ndarray, shape (n,)
    residual : float
        ``||a x - z||_2``.
    """
    a = np.asarray(a, dtype=float)
    z = np.asarray(z, dtype=float).ravel()
    if a.ndim != 2 or a.shape[0] != z.size:
        raise DimensionMismatch(f"least_squares shapes {a.shape} and {z.shape} do not conform")
    m, n = a.shape
    if n == 0:
        return np.zeros(0), float(np.linalg.norm(z))
    if m == 0:
        return np.zeros(n), 0.0
    if rank_rtol is None:
        rank_rtol = max(m, n) * np.finfo(float).eps
    x, *_ = sla.lstsq(a, z, cond=rank_rtol, lapack_driver="gelsy")
    return x, float(np.linalg.norm(a @ x - z))


def kron(a, b):
    return np.kron(np.asarray(a), np.asarray(b))


def vec(x):
    """Column-stacking vectorization."""
    return np.asarray(x).reshape(-1, order="F")


def unvec(v, n_rows, n_cols):
    return np.asarray(v).reshape((n_rows, n_cols), order="F")


def unitarity_defect(x):
    x = np.asarray(x)
    return float(np.linalg.norm(x @ x.conj().T - np.eye(x.shape[0])))


def symmetry_defect(x):
    x = np.asarray(x)
    return float(np.linalg.norm(x - x.T))
