import numpy as np
import pytest

from shellmodal.core.assembly import apply_dirichlet, assemble_system
from shellmodal.core.discretization import make_disk
from shellmodal.services.classification import classify_disk_modes, cnt_signature, cylindrical_components
from shellmodal.services.solvers import modal_analysis

RESOLUTION = (48, 41)
RADIUS, LENGTH = 0.7, 4.0


@pytest.fixture
def tube():
    phi, z = np.meshgrid(np.linspace(0.0, 2.0 * np.pi, RESOLUTION[0]), np.linspace(0.0, LENGTH, RESOLUTION[1]), indexing="ij")
    points = np.column_stack([RADIUS * np.cos(phi).ravel(), RADIUS * np.sin(phi).ravel(), z.ravel()])
    return points, phi.ravel(), z.ravel()


def radial_field(phi, amplitude):
    return amplitude[:, None] * np.column_stack([np.cos(phi), np.sin(phi), np.zeros_like(phi)])


class TestCylindricalComponents:
    def test_radial_and_hoop(self, tube):
        points, phi, _ = tube
        field = np.column_stack([-np.sin(phi), np.cos(phi), np.ones_like(phi)])
        comps = cylindrical_components(points, field)
        np.testing.assert_allclose(comps[:, 0], 0.0, atol=1e-12)
        np.testing.assert_allclose(comps[:, 1], 1.0)
        np.testing.assert_allclose(comps[:, 2], 1.0)


class TestNanotubeSignature:
    def test_radial_breathing(self, tube):
        points, phi, z = tube
        field = radial_field(phi, np.sin(np.pi * z / LENGTH))
        assert cnt_signature(points, field, RESOLUTION) == ("RB", 0, 1)

    def test_torsion(self, tube):
        points, phi, z = tube
        hoop = np.column_stack([-np.sin(phi), np.cos(phi), np.zeros_like(phi)])
        field = np.sin(2.0 * np.pi * z / LENGTH)[:, None] * hoop
        assert cnt_signature(points, field, RESOLUTION) == ("TM", 0, 2)

    def test_axial(self, tube):
        points, phi, _ = tube
        field = np.column_stack([np.zeros_like(phi), np.zeros_like(phi), np.ones_like(phi)])
        assert cnt_signature(points, field, RESOLUTION) == ("AM", 0, 1)

    def test_beam_bending(self, tube):
        points, phi, z = tube
        field = radial_field(phi, np.cos(phi) * np.sin(np.pi * z / LENGTH))
        assert cnt_signature(points, field, RESOLUTION) == ("BB", 1, 1)

    def test_shell_mode(self, tube):
        points, phi, z = tube
        field = radial_field(phi, np.cos(2.0 * phi) * np.sin(2.0 * np.pi * z / LENGTH))
        assert cnt_signature(points, field, RESOLUTION) == ("SH", 2, 2)

    def test_rotated_shell_mode(self, tube):
        points, phi, z = tube
        field = radial_field(phi, np.sin(3.0 * phi + 0.4) * np.sin(np.pi * z / LENGTH))
        assert cnt_signature(points, field, RESOLUTION) == ("SH", 3, 1)


def test_disk_fundamental_is_axisymmetric(gga):
    model = make_disk(5.0, 6, params=gga, boundary="clamped")
    system = apply_dirichlet(model, assemble_system(model, np.zeros(model.n_dofs)))
    solution = modal_analysis(system.K, system.M, n_modes=3)
    labels = classify_disk_modes(model, solution)
    assert labels[0] == "(0,0)"
    assert set(labels[1:]) <= {"(1,0)c", "(1,0)s", "mode2", "mode3"}
