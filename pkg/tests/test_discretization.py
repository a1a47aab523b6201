import math

import numpy as np
import pytest

from shellmodal.core.discretization import (
    NurbsPatch,
    basis_eval,
    chiral_angle,
    cnt_radius,
    disk_patch,
    element_connectivity,
    evaluate_surface,
    greville_abscissae,
    make_cnt,
    make_disk,
    make_square_plate,
    open_uniform_knots,
    periodic_uniform_knots,
    refine_uniform,
    ring_knots,
    rolled_armchair,
    sample_grid,
    surface_quadrature,
)
from shellmodal.core.geometry import SurfaceFrame
from shellmodal.errors import DiscretizationError


class TestKnots:
    def test_open_uniform(self):
        np.testing.assert_allclose(open_uniform_knots(3, 2), [0, 0, 0, 1 / 3, 2 / 3, 1, 1, 1])

    def test_greville(self):
        np.testing.assert_allclose(greville_abscissae(open_uniform_knots(3, 2), 2), [0, 1 / 6, 1 / 2, 5 / 6, 1])


class TestBasis:
    @pytest.mark.parametrize("patch", [refine_uniform(disk_patch(2.0), (3, 3)), make_square_plate(5.0, (3, 3)).patch])
    def test_partition_of_unity(self, patch):
        values = basis_eval(patch, (1, 2), (0.5, 0.8))
        assert values.N.sum() == pytest.approx(1.0, abs=1e-13)
        np.testing.assert_allclose(values.dN.sum(axis=-1), 0.0, atol=1e-11)
        np.testing.assert_allclose(values.ddN.sum(axis=-1), 0.0, atol=1e-9)

    def test_point_outside_element(self):
        patch = make_square_plate(5.0, (3, 3)).patch
        with pytest.raises(DiscretizationError):
            basis_eval(patch, (0, 0), (0.9, 0.1))

    def test_plate_map_is_affine(self):
        patch = make_square_plate(5.0, (4, 3)).patch
        params = np.array([[0.1, 0.7], [0.45, 0.2], [1.0, 1.0]])
        np.testing.assert_allclose(evaluate_surface(patch, params), np.column_stack([5.0 * params, np.zeros(3)]), atol=1e-12)


class TestRefinement:
    def test_knot_insertion_keeps_geometry(self, rng):
        coarse = disk_patch(2.0)
        fine = refine_uniform(coarse, (3, 4))
        assert fine.n_elements == (3, 4)
        params = rng.uniform(0.0, 1.0, size=(20, 2))
        np.testing.assert_allclose(evaluate_surface(fine, params), evaluate_surface(coarse, params), atol=1e-12)


class TestPlate:
    def test_dofs(self, plate):
        assert plate.n_dofs == 75
        assert plate.fixed_dofs.size == 48
        assert plate.free_dofs.size == 27

    def test_area(self, plate):
        assert plate.reference_area() == pytest.approx(25.0, rel=1e-12)

    def test_free_plate_has_no_fixed_dofs(self, free_plate):
        assert free_plate.is_free
        assert free_plate.penalty == 0.0

    def test_clamped_plate_gets_penalty(self, gga):
        model = make_square_plate(5.0, (3, 3), params=gga, boundary="clamped")
        assert model.penalty == pytest.approx(1e3 * gga.c_bend)
        assert model.boundary_quadrature is not None

    @pytest.mark.parametrize("elements", [(1, 1), (1, 4)])
    def test_too_coarse(self, elements):
        with pytest.raises(DiscretizationError):
            make_square_plate(5.0, elements)

    def test_unknown_boundary(self):
        with pytest.raises(DiscretizationError):
            make_square_plate(5.0, (3, 3), boundary="hinged")


class TestDisk:
    def test_boundary_is_a_circle(self, clamped_disk):
        params = sample_grid(clamped_disk.patch, (9, 9))
        edge = np.any((params == 0.0) | (params == 1.0), axis=1)
        points = evaluate_surface(clamped_disk.patch, params[edge])
        np.testing.assert_allclose(np.hypot(points[:, 0], points[:, 1]), 5.0, rtol=1e-12)

    def test_area(self, gga):
        model = make_disk(5.0, 6, params=gga)
        assert model.reference_area() == pytest.approx(math.pi * 25.0, rel=1e-3)

    def test_only_quadratic(self):
        with pytest.raises(DiscretizationError):
            make_disk(5.0, 4, degree=3)


def polygon_ring_tube(radius, n_circ, length=2.0):
    """Non-rational periodic quadratic tube passing through the radius at its knots."""
    ku = periodic_uniform_knots(n_circ, 2)
    kv = open_uniform_knots(2, 2)
    angles = 2.0 * math.pi * np.arange(n_circ) / n_circ
    ring = radius / math.cos(math.pi / n_circ) * np.column_stack([np.cos(angles), np.sin(angles)])
    z = greville_abscissae(kv, 2) * length
    points = np.empty((n_circ, len(z), 3))
    points[:, :, :2] = ring[:, None, :]
    points[:, :, 2] = z[None, :]
    return NurbsPatch((2, 2), (ku, kv), points, np.ones(points.shape[:2]), periodic=(True, False))


def quadrature_frame(patch):
    quad = surface_quadrature(patch)
    return SurfaceFrame.from_points(patch.control_points.reshape(-1, 3)[quad.point_conn], quad.basis)


def mean_curvature_error(frame, radius):
    mixed = np.einsum("...ab,...bg->...ag", frame.metric_inv, frame.curvature)
    trace = mixed[..., 0, 0] + mixed[..., 1, 1]
    return float(np.max(np.abs(np.abs(trace) * radius - 1.0)))


class TestNanotube:
    def test_radius(self):
        assert cnt_radius(10, 10) == pytest.approx(0.67802, abs=1e-4)

    def test_chiral_angle(self):
        assert chiral_angle(7, 0) == 0.0
        assert chiral_angle(5, 5) == pytest.approx(math.pi / 6)

    def test_ring_knots(self):
        knots = ring_knots(3, 2)
        assert len(knots) == 3 * 3 + 9
        np.testing.assert_allclose(knots[2:5], 0.0)
        np.testing.assert_allclose(knots[-7:-4], 1.0)

    @pytest.mark.parametrize("elements", [(3, 2), (8, 4), (16, 4)])
    def test_surface_lies_on_the_cylinder(self, gga, elements):
        model = make_cnt((5, 5), 2.0, elements, params=gga)
        radius = model.info["radius_nm"]
        samples = evaluate_surface(model.patch, sample_grid(model.patch, (97, 5)))
        np.testing.assert_allclose(np.hypot(samples[:, 0], samples[:, 1]), radius, rtol=1e-10)
        x = model.reference_frame.x
        np.testing.assert_allclose(np.hypot(x[:, 0], x[:, 1]), radius, rtol=1e-10)

    @pytest.mark.parametrize("elements", [(3, 2), (8, 4), (16, 4)])
    def test_curvature_is_exact_at_quadrature_points(self, gga, elements):
        model = make_cnt((5, 5), 2.0, elements, params=gga)
        frame = model.reference_frame
        radius = model.info["radius_nm"]
        assert mean_curvature_error(frame, radius) < 1e-10
        mixed = np.einsum("...ab,...bg->...ag", frame.metric_inv, frame.curvature)
        gauss = mixed[..., 0, 0] * mixed[..., 1, 1] - mixed[..., 0, 1] * mixed[..., 1, 0]
        np.testing.assert_allclose(gauss * radius ** 2, 0.0, atol=1e-10)
        radial = np.einsum("...i,...i->...", frame.normal[:, :2], frame.x[:, :2]) / radius
        np.testing.assert_allclose(np.abs(radial), 1.0, rtol=1e-10)

    def test_polygon_ring_curvature_converges(self):
        radius = cnt_radius(5, 5)
        errors = [mean_curvature_error(quadrature_frame(polygon_ring_tube(radius, n)), radius) for n in (8, 16, 32)]
        assert errors[0] > 1e-3
        orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
        assert np.all(orders >= 1.8)

    def test_seam_is_smooth(self, free_cnt):
        patch = free_cnt.patch
        last = patch.n_elements[0] - 1
        points = patch.control_points.reshape(-1, 3)
        for ev, v in [(0, 0.1), (2, 0.6)]:
            left = basis_eval(patch, (last, ev), (1.0, v))
            right = basis_eval(patch, (0, ev), (0.0, v))
            conn_left = element_connectivity(patch, (last, ev))
            conn_right = element_connectivity(patch, (0, ev))
            np.testing.assert_allclose(left.N @ points[conn_left], right.N @ points[conn_right], atol=1e-10)
            np.testing.assert_allclose(left.dN @ points[conn_left], right.dN @ points[conn_right], atol=1e-10)

    def test_area(self, gga):
        model = make_cnt((5, 5), 2.0, (16, 4), params=gga)
        expected = 2.0 * math.pi * model.info["radius_nm"] * model.info["length_nm"]
        assert model.reference_area() == pytest.approx(expected, rel=1e-6)

    def test_periodic_control_net(self, free_cnt):
        assert free_cnt.patch.shape == (24, 6)
        assert free_cnt.patch.degrees == (4, 2)
        assert free_cnt.patch.periodic == (True, False)
        assert np.all(free_cnt.patch.weights > 0.0)
        assert free_cnt.is_free

    def test_held_end_rings(self, gga):
        model = make_cnt((5, 5), 1.0, (8, 4), params=gga, boundary="simply-supported")
        assert model.fixed_dofs.size == 2 * 24 * 3

    def test_armchair_direction_of_zigzag_tube_is_axial(self):
        x = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 2.0]])
        np.testing.assert_allclose(rolled_armchair(x, 0.0), [[0.0, 0.0, 1.0], [0.0, 0.0, 1.0]], atol=1e-15)

    def test_invalid_chirality(self):
        with pytest.raises(DiscretizationError):
            make_cnt((0, 0), 1.0, (8, 4))

    def test_clamped_ends_not_supported(self):
        with pytest.raises(DiscretizationError):
            make_cnt((5, 5), 1.0, (8, 4), boundary="clamped")
