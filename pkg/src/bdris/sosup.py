"""Structure-oriented symmetric unitary projection.

Given any square matrix ``X`` and an architecture, find a susceptance ``B``
obeying the architecture's sparsity pattern whose scattering matrix is close
to ``X`` in Frobenius norm. The symmetric part of ``X`` is Takagi-factorized
as ``Q S Q^T``; the lower bound ``||S_R - I_R||^2`` is met when
``theta conj(Q_R) = Q_R``, which is linear in ``B`` and is solved in the
least-squares sense over the architecture's independent variables.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from . import arch
from .errors import DimensionMismatch
from .network import DEFAULT_Z0, Susceptance, scattering_from_susceptance
from .numlin import DEFAULT_RANK_TOL, least_squares, takagi

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ProjectionResult:
    """Output of :func:`project`.

    ``lower_bound`` is ``||S_R - I_R||_F^2`` summed over independent blocks.
    ``tight_bound`` additionally accounts for the skew-symmetric part of the
    input and the singular values dropped below the rank threshold; it is the
    exact minimum of ``||X - theta||_F^2`` over all symmetric unitary
    ``theta`` and is attained whenever the linear system is consistent.
    """

    b: Susceptance
    theta: np.ndarray
    lower_bound: float
    achieved: float
    ls_residual: float
    tight_bound: float
    rank: int
    degenerate: bool = False
    block_ranks: tuple = field(default=())

    @property
    def b_vec(self):
        return arch.transform_matrix(self.b.spec).vec_i(self.b.b)


def lower_bound(sigma):
    sigma = np.asarray(sigma, dtype=float)
    return float(np.sum((sigma - 1.0) ** 2))


def build_linear_system(q_r, maps, z0=DEFAULT_Z0):
    """Real system ``A b = z`` expressing ``B Im(C) = Im(D)``.

    ``C = j z0 (conj(Q_R) + Q_R)`` and ``D = conj(Q_R) - Q_R``, so
    ``A = (Im(C)^T kron I_N) R`` and ``z = vec(Im(D))``. The Kronecker product
    is never formed; each non-zero of ``R`` scatters one row of ``Im(C)``.
    """
    q_r = np.asarray(q_r, dtype=complex)
    n, r = q_r.shape
    if n != maps.n:
        raise DimensionMismatch(f"Q_R has {n} rows, structure is for N={maps.n}")
    c = 1j * z0 * (q_r.conj() + q_r)
    d = q_r.conj() - q_r
    # real parts of C and D vanish identically, so B Re(C) = Re(D) carries no information
    assert np.max(np.abs(c.real), initial=0.0) <= 1e-10 * max(1.0, z0)
    assert np.max(np.abs(d.real), initial=0.0) <= 1e-10
    im_c = c.imag
    rows, cols, var = maps.entry_positions
    a3 = np.zeros((r, n, maps.n_b))
    np.add.at(a3, (slice(None), rows, var), im_c[cols, :].T)
    a = a3.reshape(r * n, maps.n_b)
    z = d.imag.reshape(-1, order="F")
    return a, z


@dataclass(frozen=True, eq=False)
class _BlockSolution:
    b: np.ndarray
    lower_bound: float
    tight_bound: float
    ls_residual: float
    rank: int
    degenerate: bool


def _project_block(x, maps, z0, rank_tol):
    n = x.shape[0]
    sym = 0.5 * (x + x.T)
    skew_energy = float(np.linalg.norm(x - sym) ** 2)
    if np.linalg.norm(sym) <= 1e-12 * max(1.0, np.linalg.norm(x)):
        return _BlockSolution(np.zeros((n, n)), float(n), float(n) + skew_energy, 0.0, 0, True)
    tk = takagi(sym, rank_tol=rank_tol)
    a, z = build_linear_system(tk.q_r, maps, z0)
    b_vec, resid = least_squares(a, z)
    return _BlockSolution(
        maps.expand(b_vec),
        lower_bound(tk.sigma_r),
        lower_bound(tk.sigma) + skew_energy,
        resid,
        tk.rank,
        False,
    )


def _block_layout(spec):
    """Diagonal blocks solved independently, as (size, stems, count)."""
    if spec.kind in arch.GROUPED or spec.kind is arch.Kind.SINGLE:
        return spec.group_size, spec.stems_per_block, spec.n_groups
    return spec.n, spec.stems_per_block, 1


def project(x, spec, z0=DEFAULT_Z0, rank_tol=DEFAULT_RANK_TOL):
    """Project ``x`` onto the scattering matrices realizable by ``spec``.

    Block-diagonal architectures (single, group, forest, cluster) are projected
    one diagonal block at a time; entries of ``x`` outside the blocks cannot be
    matched by any feasible ``theta`` and only add a constant to the error.
    """
    x = np.asarray(x, dtype=complex)
    if x.shape != (spec.n, spec.n):
        raise DimensionMismatch(f"input has shape {x.shape}, architecture needs N={spec.n}")
    size, stems, count = _block_layout(spec)
    block_spec = arch.make_arch(arch.Kind.STEM, size, q=stems)
    maps = arch.transform_matrix(block_spec)

    b = np.zeros((spec.n, spec.n))
    lb = tight = 0.0
    resid_sq = 0.0
    ranks = []
    degenerate = True
    for g in range(count):
        sl = slice(g * size, (g + 1) * size)
        sol = _project_block(x[sl, sl], maps, z0, rank_tol)
        b[sl, sl] = sol.b
        lb += sol.lower_bound
        tight += sol.tight_bound
        resid_sq += sol.ls_residual**2
        ranks.append(sol.rank)
        degenerate &= sol.degenerate
    if count > 1:
        off = np.ones((spec.n, spec.n), dtype=bool)
        for g in range(count):
            sl = slice(g * size, (g + 1) * size)
            off[sl, sl] = False
        tight += float(np.sum(np.abs(x[off]) ** 2))
    if degenerate:
        log.warning("symmetric part of the projection input is numerically zero; returning B = 0")

    sus = Susceptance(b, spec)
    theta = scattering_from_susceptance(sus, z0)
    achieved = float(np.linalg.norm(x - theta) ** 2)
    return ProjectionResult(
        b=sus,
        theta=theta,
        lower_bound=lb,
        achieved=achieved,
        ls_residual=float(np.sqrt(resid_sq)),
        tight_bound=tight,
        rank=int(sum(ranks)),
        degenerate=bool(degenerate),
        block_ranks=tuple(ranks),
    )
