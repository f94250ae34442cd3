"""Mapping between susceptance and scattering matrices of a lossless reciprocal network."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import arch
from .errors import DimensionMismatch, MaskViolation, SingularAtMinusOne, SingularMatrix
from .numlin import symmetry_defect, unitarity_defect

DEFAULT_Z0 = 50.0


@dataclass(frozen=True, eq=False)
class Susceptance:
    b: np.ndarray
    spec: arch.ArchSpec

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float)
        if b.shape != (self.spec.n, self.spec.n):
            raise DimensionMismatch(f"B has shape {b.shape}, architecture needs N={self.spec.n}")
        if np.any(b[arch.mask(self.spec) == 0] != 0):
            raise MaskViolation("susceptance has non-zeros outside the architecture mask")
        upper = np.triu(b)
        object.__setattr__(self, "b", upper + np.triu(b, 1).T)

    @classmethod
    def from_vector(cls, b_vec, spec, maps=None):
        maps = maps or arch.transform_matrix(spec)
        return cls(maps.expand(b_vec), spec)


@dataclass(frozen=True, eq=False)
class ScatteringReport:
    unitarity_defect: float
    symmetry_defect: float
    passed: bool

    @property
    def pass_(self):
        return self.passed


def scattering_from_susceptance(b, z0=DEFAULT_Z0):
    """``theta = (I + j z0 B)^{-1} (I - j z0 B)``.

    ``b`` may be a :class:`Susceptance` or a real symmetric array.
    """
    if z0 <= 0:
        raise ValueError("reference impedance z0 must be positive")
    bm = b.b if isinstance(b, Susceptance) else np.asarray(b, dtype=float)
    n = bm.shape[0]
    jzb = 1j * z0 * bm
    eye = np.eye(n)
    try:
        lu = sla.lu_factor(eye + jzb, check_finite=True)
    except (ValueError, sla.LinAlgError) as exc:
        raise SingularMatrix(str(exc)) from exc
    if np.min(np.abs(np.diag(lu[0]))) == 0.0:
        raise SingularMatrix("I + j z0 B is singular")
    return sla.lu_solve(lu, eye - jzb)


def susceptance_from_scattering(theta, z0=DEFAULT_Z0, imag_tol=1e-8):
    """Inverse map ``B = (-j / z0) (I + theta)^{-1} (I - theta)``."""
    theta = np.asarray(theta, dtype=complex)
    n = theta.shape[0]
    eye = np.eye(n)
    eig = np.linalg.eigvals(theta)
    if np.min(np.abs(eig + 1.0)) < 1e-10:
        raise SingularAtMinusOne("scattering matrix has an eigenvalue at -1")
    b = (-1j / z0) * np.linalg.solve(eye + theta, eye - theta)
    scale = max(1.0, float(np.max(np.abs(b.real))))
    if np.max(np.abs(b.imag)) > imag_tol * scale:
        raise ValueError(
            f"recovered susceptance has imaginary part {np.max(np.abs(b.imag)):.3e}; "
            "input is not symmetric unitary"
        )
    b = b.real
    return 0.5 * (b + b.T)


def validate_scattering(theta, tol=1e-9):
    theta = np.asarray(theta)
    if theta.ndim != 2 or theta.shape[0] != theta.shape[1]:
        raise DimensionMismatch(f"scattering matrix must be square, got {theta.shape}")
    u = unitarity_defect(theta)
    s = symmetry_defect(theta)
    return ScatteringReport(u, s, bool(u < tol and s < tol))
