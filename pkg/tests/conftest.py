"""
Shared fixtures: small plate, disk and nanotube models with GGA + QM graphene.
"""

import numpy as np
import pytest

from shellmodal.core.discretization import make_cnt, make_disk, make_square_plate
from shellmodal.core.material import MaterialParams


@pytest.fixture(scope="session")
def gga():
    return MaterialParams.from_presets("GGA", "QM")


@pytest.fixture
def plate(gga):
    """5 nm simply supported plate, 3x3 quadratic elements."""
    return make_square_plate(5.0, (3, 3), params=gga)


@pytest.fixture
def free_plate(gga):
    return make_square_plate(5.0, (3, 3), params=gga, boundary="free")


@pytest.fixture
def clamped_disk(gga):
    return make_disk(5.0, 3, params=gga, boundary="clamped")


@pytest.fixture
def free_cnt(gga):
    return make_cnt((5, 5), 1.0, (8, 4), params=gga)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def quadrature_points(model):
    """Reference control points gathered per quadrature point, with the basis."""
    quad = model.quadrature
    return model.ref_points[quad.point_conn], quad.basis


def central_difference(fn, u, d, h=1e-6):
    return (fn(u + h * d) - fn(u - h * d)) / (2.0 * h)
