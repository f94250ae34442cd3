import numpy as np
import pytest

from bdris import arch
from bdris.errors import DimensionMismatch, MaskViolation, SingularAtMinusOne
from bdris.network import (
    Susceptance,
    scattering_from_susceptance,
    susceptance_from_scattering,
    validate_scattering,
)

from conftest import random_complex, random_masked_b, specs_for


def test_zero_susceptance_gives_identity():
    theta = scattering_from_susceptance(np.zeros((4, 4)))
    np.testing.assert_array_equal(theta, np.eye(4))


def test_scalar():
    theta = scattering_from_susceptance(np.array([[1.0 / 50.0]]))
    assert theta[0, 0] == pytest.approx(-1j, abs=1e-15)


def test_random_symmetric_b_is_symmetric_unitary():
    rng = np.random.default_rng(0)
    for _ in range(100):
        x = rng.standard_normal((8, 8))
        theta = scattering_from_susceptance(x + x.T)
        rep = validate_scattering(theta, tol=1e-10)
        assert rep.passed, rep


def test_inverse_examples():
    np.testing.assert_allclose(susceptance_from_scattering(np.eye(3)), np.zeros((3, 3)), atol=1e-15)
    b = susceptance_from_scattering(np.array([[-1j]]), z0=1.0)
    assert b[0, 0] == pytest.approx(1.0)


def test_round_trip():
    rng = np.random.default_rng(1)
    for _ in range(100):
        x = 0.02 * rng.standard_normal((6, 6))
        b = x + x.T
        back = susceptance_from_scattering(scattering_from_susceptance(b))
        assert np.max(np.abs(back - b)) < 1e-8


def test_eigenvalue_at_minus_one():
    with pytest.raises(SingularAtMinusOne):
        susceptance_from_scattering(-np.eye(2))


def test_inverse_rejects_non_symmetric_unitary():
    rng = np.random.default_rng(2)
    q, _ = np.linalg.qr(random_complex(rng, (4, 4)))
    with pytest.raises(ValueError):
        susceptance_from_scattering(q)


class TestValidate:
    def test_identity(self):
        rep = validate_scattering(np.eye(3))
        assert rep.unitarity_defect == 0 and rep.symmetry_defect == 0 and rep.passed

    def test_diagonal_phases(self):
        rep = validate_scattering(np.diag(np.exp(1j * np.array([np.pi / 4, np.pi / 3]))))
        assert rep.unitarity_defect < 1e-15 and rep.symmetry_defect == 0 and rep.passed

    def test_non_unitary(self):
        rng = np.random.default_rng(3)
        a = random_complex(rng, (4, 4))
        rep = validate_scattering(a + a.T)
        assert not rep.passed
        assert rep.unitarity_defect > 0.1

    def test_non_square(self):
        with pytest.raises(DimensionMismatch):
            validate_scattering(np.ones((2, 3)))


class TestSusceptance:
    def test_mask_enforced(self):
        spec = arch.make_arch("single", 3)
        with pytest.raises(MaskViolation):
            Susceptance(np.ones((3, 3)), spec)

    def test_shape(self):
        with pytest.raises(DimensionMismatch):
            Susceptance(np.zeros((2, 2)), arch.make_arch("fully", 3))

    def test_from_vector(self):
        rng = np.random.default_rng(4)
        for spec in specs_for(8):
            b = random_masked_b(spec, rng)
            sus = Susceptance.from_vector(arch.vec_i(b, spec), spec)
            np.testing.assert_array_equal(sus.b, b)
            np.testing.assert_array_equal(sus.b, sus.b.T)
