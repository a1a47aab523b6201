import numpy as np
import pytest

from conftest import quadrature_points
from shellmodal.core.discretization import quarter_cylinder_patch, surface_quadrature
from shellmodal.core.geometry import evaluate_kinematics, log_invariants, max_stretch_angle
from shellmodal.core.material import lattice_invariants
from shellmodal.errors import DegenerateMetricError, GeometryError

ARMCHAIR_X = np.array([1.0, 0.0, 0.0])


def deform(points, F):
    """Apply an in-plane deformation gradient to flat points."""
    out = points.copy()
    out[..., :2] = points[..., :2] @ np.asarray(F).T
    return out


def test_reference_state_has_unit_stretches(plate):
    ref, basis = quadrature_points(plate)
    state = evaluate_kinematics(ref, ref, basis, ARMCHAIR_X)
    np.testing.assert_allclose(state.lambda1, 1.0, atol=1e-12)
    np.testing.assert_allclose(state.lambda2, 1.0, atol=1e-12)
    np.testing.assert_allclose(state.J, 1.0, atol=1e-12)
    np.testing.assert_allclose(state.kappa1, 0.0, atol=1e-12)
    np.testing.assert_allclose(state.theta, 0.0)


def test_uniaxial_stretch_along_armchair(plate):
    ref, basis = quadrature_points(plate)
    state = evaluate_kinematics(ref, deform(ref, [[1.2, 0.0], [0.0, 1.0]]), basis, ARMCHAIR_X)
    np.testing.assert_allclose(state.lambda1, 1.2, rtol=1e-12)
    np.testing.assert_allclose(state.lambda2, 1.0, rtol=1e-12)
    np.testing.assert_allclose(state.J, 1.2, rtol=1e-12)
    np.testing.assert_allclose(np.cos(2.0 * state.theta), 1.0, atol=1e-10)

    _, J2, J3 = log_invariants(state)
    np.testing.assert_allclose(J2, (0.5 * np.log(1.2)) ** 2, rtol=1e-10)
    np.testing.assert_allclose(J3, (0.5 * np.log(1.2)) ** 3, rtol=1e-10)


def test_stretch_along_zigzag_flips_cubic_invariant(plate):
    ref, basis = quadrature_points(plate)
    state = evaluate_kinematics(ref, deform(ref, [[1.0, 0.0], [0.0, 1.2]]), basis, ARMCHAIR_X)
    np.testing.assert_allclose(np.cos(2.0 * state.theta), -1.0, atol=1e-10)
    _, _, J3 = log_invariants(state)
    np.testing.assert_allclose(J3, -((0.5 * np.log(1.2)) ** 3), rtol=1e-10)


def test_isotropic_stretch_is_degenerate(plate):
    ref, basis = quadrature_points(plate)
    state = evaluate_kinematics(ref, deform(ref, 1.1 * np.eye(2)), basis, ARMCHAIR_X)
    np.testing.assert_allclose(state.theta, 0.0)
    np.testing.assert_allclose(state.Y1, np.broadcast_to(ARMCHAIR_X, state.Y1.shape))
    J1, J2, J3 = log_invariants(state)
    np.testing.assert_allclose(J1, np.log(1.21), rtol=1e-12)
    np.testing.assert_allclose(J2, 0.0, atol=1e-14)
    np.testing.assert_allclose(J3, 0.0, atol=1e-14)


def test_lattice_invariants_match_principal_stretch_form(plate):
    ref, basis = quadrature_points(plate)
    state = evaluate_kinematics(ref, deform(ref, [[1.1, 0.05], [0.02, 0.95]]), basis, ARMCHAIR_X)
    expected = log_invariants(state)
    computed = lattice_invariants(state.cauchy_green)
    for value, reference in zip(computed, expected):
        np.testing.assert_allclose(value, reference, atol=1e-12)


def test_collapsed_surface_raises(plate):
    ref, basis = quadrature_points(plate)
    collapsed = ref * np.array([1.0, 0.0, 1.0])
    with pytest.raises(DegenerateMetricError):
        evaluate_kinematics(ref, collapsed, basis, ARMCHAIR_X)


def test_cylinder_curvatures():
    radius = 2.0
    patch = quarter_cylinder_patch(radius, 1.0, (2, 2))
    quad = surface_quadrature(patch)
    ref = patch.control_points.reshape(-1, 3)[quad.point_conn]
    state = evaluate_kinematics(ref, ref, quad.basis, np.array([0.0, 0.0, 1.0]))
    np.testing.assert_allclose(np.abs(state.kappa1 + state.kappa2), 1.0 / radius, rtol=1e-10)
    np.testing.assert_allclose(state.kappa1 * state.kappa2, 0.0, atol=1e-10)


def test_max_stretch_angle():
    assert max_stretch_angle([0.0, 1.0, 0.0], ARMCHAIR_X) == pytest.approx(np.pi / 2)
    assert max_stretch_angle(ARMCHAIR_X, ARMCHAIR_X) == pytest.approx(0.0)


def test_max_stretch_angle_rejects_non_unit_vectors():
    with pytest.raises(GeometryError):
        max_stretch_angle([2.0, 0.0, 0.0], ARMCHAIR_X)
