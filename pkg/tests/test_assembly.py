import math

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from conftest import central_difference
from shellmodal.core.assembly import (
    apply_dirichlet,
    assemble_internal,
    assemble_mass,
    assemble_rotation_penalty,
    assemble_system,
    internal_energy,
    rotation_penalty_energy,
    symmetry_error,
)


def direction(rng, n):
    d = rng.standard_normal(n)
    return d / np.linalg.norm(d)


def force(model):
    return lambda u: assemble_internal(model, u, with_tangent=False)[0]


def energy(model):
    return lambda u: internal_energy(model, u)


class TestMass:
    def test_total_mass_of_plate(self, free_plate):
        M = assemble_mass(free_plate)
        e = np.zeros(free_plate.n_dofs)
        e[0::3] = 1.0
        assert e @ (M @ e) == pytest.approx(0.76106 * 25.0, rel=1e-10)

    def test_total_mass_of_disk(self, gga):
        from shellmodal.core.discretization import make_disk

        model = make_disk(5.0, 6, params=gga, boundary="free")
        e = np.zeros(model.n_dofs)
        e[2::3] = 1.0
        assert e @ (assemble_mass(model) @ e) == pytest.approx(gga.rho0 * math.pi * 25.0, rel=1e-3)

    def test_positive_definite(self, plate):
        M = assemble_mass(plate).toarray()
        assert np.allclose(M, M.T)
        assert np.linalg.eigvalsh(M).min() > 0.0

    def test_cached(self, plate):
        assert assemble_mass(plate) is assemble_mass(plate)


class TestStressFreeState:
    @pytest.mark.parametrize("name", ["plate", "clamped_disk"])
    def test_no_internal_force(self, request, name):
        model = request.getfixturevalue(name)
        f, K = assemble_internal(model, np.zeros(model.n_dofs))
        np.testing.assert_allclose(f, 0.0, atol=1e-10)
        assert symmetry_error(K) < 1e-10

    def test_rigid_rotation_is_force_free(self, free_plate):
        X = free_plate.ref_points
        R = Rotation.from_rotvec([0.4, -0.3, 0.2]).as_matrix()
        u = (X @ R.T - X).ravel()
        f, _ = assemble_internal(free_plate, u, with_tangent=False)
        np.testing.assert_allclose(f, 0.0, atol=1e-8)
        assert internal_energy(free_plate, u) == pytest.approx(0.0, abs=1e-10)


class TestTubePrestress:
    def test_reference_bending_energy(self, free_cnt):
        R = free_cnt.info["radius_nm"]
        L = free_cnt.info["length_nm"]
        expected = free_cnt.params.c_bend / (2.0 * R ** 2) * 2.0 * math.pi * R * L
        assert internal_energy(free_cnt, np.zeros(free_cnt.n_dofs)) == pytest.approx(expected, rel=1e-6)

    def test_reference_force_is_self_equilibrated(self, free_cnt):
        f, K = assemble_internal(free_cnt, np.zeros(free_cnt.n_dofs))
        assert np.linalg.norm(f) > 1e-3
        assert symmetry_error(K) < 1e-10
        X = free_cnt.ref_points
        for axis in np.eye(3):
            for r in (np.tile(axis, len(X)), np.cross(axis, X).ravel()):
                assert abs(f @ r) <= 1e-10 * np.linalg.norm(f) * np.linalg.norm(r)

    def test_stiffness_under_prestress(self, free_cnt):
        f, K = assemble_internal(free_cnt, np.zeros(free_cnt.n_dofs))
        X = free_cnt.ref_points
        k_norm = np.abs(K).sum(axis=1).max()
        for axis in np.eye(3):
            translation = np.tile(axis, len(X))
            assert np.linalg.norm(K @ translation) <= 1e-8 * k_norm * np.linalg.norm(translation)
            # a rotated tube carries the rotated force, so K (w x X) = w x f
            rotation = np.cross(axis, X).ravel()
            turned = np.cross(axis, f.reshape(-1, 3)).ravel()
            assert np.linalg.norm(K @ rotation - turned) <= 1e-8 * k_norm * np.linalg.norm(rotation)


class TestConsistency:
    @pytest.mark.parametrize("name, scale", [("free_plate", 0.02), ("clamped_disk", 0.02), ("free_cnt", 0.005)])
    def test_force_is_energy_gradient(self, request, rng, name, scale):
        model = request.getfixturevalue(name)
        u = scale * rng.standard_normal(model.n_dofs)
        d = direction(rng, model.n_dofs)
        f, _ = assemble_internal(model, u, with_tangent=False)
        assert f @ d == pytest.approx(central_difference(energy(model), u, d), rel=1e-5)

    @pytest.mark.parametrize("name, scale", [("free_plate", 0.02), ("clamped_disk", 0.02), ("free_cnt", 0.005)])
    def test_stiffness_is_force_jacobian(self, request, rng, name, scale):
        model = request.getfixturevalue(name)
        u = scale * rng.standard_normal(model.n_dofs)
        d = direction(rng, model.n_dofs)
        _, K = assemble_internal(model, u)
        Kd = K @ d
        fd = central_difference(force(model), u, d)
        assert np.linalg.norm(fd - Kd) <= 1e-5 * np.linalg.norm(Kd)
        assert symmetry_error(K) < 1e-8

    def test_rotation_penalty(self, clamped_disk, rng):
        u = 0.02 * rng.standard_normal(clamped_disk.n_dofs)
        d = direction(rng, clamped_disk.n_dofs)
        f, K = assemble_rotation_penalty(clamped_disk, u)
        slope = central_difference(lambda v: rotation_penalty_energy(clamped_disk, v), u, d)
        assert f @ d == pytest.approx(slope, rel=1e-5)
        fd = central_difference(lambda v: assemble_rotation_penalty(clamped_disk, v)[0], u, d)
        assert np.linalg.norm(fd - K @ d) <= 1e-5 * np.linalg.norm(K @ d)

    def test_rotation_penalty_vanishes_in_reference(self, clamped_disk):
        assert rotation_penalty_energy(clamped_disk, np.zeros(clamped_disk.n_dofs)) == 0.0


class TestSystem:
    def test_reduced_sizes(self, plate):
        system = apply_dirichlet(plate, assemble_system(plate, np.zeros(plate.n_dofs)))
        assert system.size == plate.free_dofs.size
        assert system.K.shape == system.M.shape == (27, 27)
        np.testing.assert_allclose(system.residual, 0.0, atol=1e-10)

    def test_simply_supported_plate_stiffness_is_definite(self, plate):
        system = apply_dirichlet(plate, assemble_system(plate, np.zeros(plate.n_dofs)))
        assert np.linalg.eigvalsh(system.K.toarray()).min() > 0.0
