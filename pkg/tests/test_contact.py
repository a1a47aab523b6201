import numpy as np
import pytest

from conftest import central_difference
from shellmodal.core.contact import (
    AdhesionParams,
    SubstrateProfile,
    adhesion_energy,
    cavity_profile,
    contact_force_and_stiffness,
    half_space_derivatives,
    half_space_potential,
    inflection_gap,
    min_gap,
)
from shellmodal.errors import ContactError, PenetrationError


@pytest.fixture
def adhesion():
    return AdhesionParams(Gamma=0.1, h0=0.34, profile=SubstrateProfile(kind="flat", z_s=-0.34))


class TestPotential:
    def test_minimum_at_h0(self, adhesion):
        psi, dpsi, d2psi = half_space_derivatives(adhesion.h0, adhesion)
        assert psi == pytest.approx(-adhesion.Gamma)
        assert dpsi == pytest.approx(0.0, abs=1e-12)
        assert d2psi > 0.0

    def test_inflection(self, adhesion):
        _, _, d2psi = half_space_derivatives(inflection_gap(adhesion), adhesion)
        assert d2psi == pytest.approx(0.0, abs=1e-10)

    def test_derivatives_match_finite_differences(self, adhesion):
        r, h = 0.45, 1e-6
        _, dpsi, d2psi = half_space_derivatives(r, adhesion)
        assert dpsi == pytest.approx((half_space_potential(r + h, adhesion) - half_space_potential(r - h, adhesion)) / (2 * h), rel=1e-7)
        assert d2psi == pytest.approx(
            (half_space_derivatives(r + h, adhesion)[1] - half_space_derivatives(r - h, adhesion)[1]) / (2 * h), rel=1e-6
        )

    def test_decays_with_distance(self, adhesion):
        assert abs(half_space_potential(10.0, adhesion)) < 1e-3 * adhesion.Gamma

    @pytest.mark.parametrize("r", [0.0, -0.1])
    def test_penetration(self, adhesion, r):
        with pytest.raises(PenetrationError):
            half_space_potential(r, adhesion)

    def test_invalid_parameters(self):
        with pytest.raises(ContactError):
            AdhesionParams(Gamma=-1.0)
        with pytest.raises(ContactError):
            AdhesionParams(Gamma=0.1, h0=0.0)

    def test_with_gamma_keeps_profile(self, adhesion):
        changed = adhesion.with_gamma(0.3)
        assert changed.Gamma == 0.3
        assert changed.profile is adhesion.profile


class TestProfiles:
    def test_cavity_regions(self):
        profile = cavity_profile(R1=10.0, R2=2.0, z_s=-1.0)
        x = np.array([[0.0, 0.0, 0.0], [11.0, 0.0, 0.0], [12.0, 0.0, 0.0], [0.0, 30.0, 0.0]])
        active, h, grad, _ = profile.evaluate(x)
        np.testing.assert_array_equal(active, [False, True, True, True])
        # fillet: quarter circle of radius 2 centered 2 below the plane at rho = 12
        assert h[1] == pytest.approx(-3.0 + np.sqrt(4.0 - 1.0))
        assert grad[1, 0] == pytest.approx(1.0 / np.sqrt(3.0))
        assert h[2] == pytest.approx(-1.0)
        assert h[3] == -1.0
        np.testing.assert_allclose(grad[3], 0.0)

    def test_cavity_needs_radii(self):
        with pytest.raises(ContactError):
            SubstrateProfile(kind="cavity", R1=0.0, R2=1.0)

    def test_unknown_profile(self):
        with pytest.raises(ContactError):
            SubstrateProfile(kind="trench")


class TestShellAdhesion:
    def test_flat_sheet_at_equilibrium_distance(self, free_plate, adhesion):
        u = np.zeros(free_plate.n_dofs)
        assert adhesion_energy(free_plate, u, adhesion) == pytest.approx(-adhesion.Gamma * 25.0, rel=1e-10)
        f, _ = contact_force_and_stiffness(free_plate, u, adhesion)
        np.testing.assert_allclose(f.reshape(-1, 3)[:, 2], 0.0, atol=1e-12)
        assert min_gap(free_plate, u, adhesion) == pytest.approx(0.34)

    def test_zero_gamma_contributes_nothing(self, free_plate, adhesion):
        f, K = contact_force_and_stiffness(free_plate, np.zeros(free_plate.n_dofs), adhesion.with_gamma(0.0))
        assert not f.any()
        assert K.nnz == 0

    def test_force_and_stiffness_consistency(self, free_plate, adhesion, rng):
        u = 0.01 * rng.standard_normal(free_plate.n_dofs)
        d = rng.standard_normal(free_plate.n_dofs)
        d /= np.linalg.norm(d)
        f, K = contact_force_and_stiffness(free_plate, u, adhesion)
        slope = central_difference(lambda v: adhesion_energy(free_plate, v, adhesion), u, d)
        assert f @ d == pytest.approx(slope, rel=1e-5)
        fd = central_difference(lambda v: contact_force_and_stiffness(free_plate, v, adhesion)[0], u, d)
        assert np.linalg.norm(fd - K @ d) <= 1e-5 * np.linalg.norm(K @ d)

    def test_sheet_pushed_into_substrate(self, free_plate, adhesion):
        u = np.zeros(free_plate.n_dofs)
        u[2::3] = -0.33
        with pytest.raises(PenetrationError):
            adhesion_energy(free_plate, u, adhesion)
