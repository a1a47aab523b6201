"""
Long acceptance runs against closed-form plate frequencies.
Deselected by default; run with `pytest -m slow`.
"""

import math
from pathlib import Path

import numpy as np
import pytest

from shellmodal.config import load_run_config
from shellmodal.core.assembly import apply_dirichlet, assemble_system
from shellmodal.core.discretization import make_cnt, make_disk, make_square_plate
from shellmodal.services.analytical import (
    PlateSpec,
    circular_mode_frequency,
    dilatation_membrane_stress,
    rect_prestressed_frequency,
    rect_ss_frequency,
    to_thz,
)
from shellmodal.services.classification import classify_plate_modes
from shellmodal.services.scenarios import run_scenario
from shellmodal.services.solvers import ContinuationOptions, LoadProgram, modal_analysis, newton_solve, run_continuation

pytestmark = pytest.mark.slow

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def spectrum(model, n_modes, n_rigid=0):
    system = apply_dirichlet(model, assemble_system(model, np.zeros(model.n_dofs)))
    return modal_analysis(system.K, system.M, n_modes=n_modes, n_rigid=n_rigid)


def test_square_plate_spectrum(gga):
    solution = spectrum(make_square_plate(5.0, (12, 12), params=gga), 4)
    spec = PlateSpec.from_params("rectangle", 5.0, gga)
    expected = [rect_ss_frequency(m, n, spec) for m, n in [(1, 1), (1, 2), (2, 1), (2, 2)]]
    np.testing.assert_allclose(np.sqrt(solution.omega2), expected, rtol=1e-2)


def test_clamped_disk_fundamental(gga):
    solution = spectrum(make_disk(5.0, 10, params=gga, boundary="clamped"), 1)
    spec = PlateSpec.from_params("circle", 5.0, gga, boundary="clamped")
    assert to_thz(math.sqrt(solution.omega2[0])) == pytest.approx(to_thz(circular_mode_frequency(0, 0, spec)), rel=2e-2)


def test_free_nanotube_has_six_rigid_modes(gga):
    model = make_cnt((10, 10), 3.0, (24, 12), params=gga)
    equilibrium = newton_solve(model, LoadProgram.reference(), 0.0, np.zeros(model.n_dofs))
    solution = modal_analysis(equilibrium.system.K, equilibrium.system.M, n_modes=6, n_rigid=6)
    assert solution.rigid_omega2.size == 6
    assert solution.omega2.min() > 0.0


def test_prestressed_plate_follows_closed_form(gga):
    model = make_square_plate(5.0, (10, 10), params=gga)
    program = LoadProgram(kind="area_stretch", start=1.0, end=1.05, steps=5)
    result = run_continuation(model, program, ContinuationOptions(n_modes=3), classifier=classify_plate_modes)
    assert result.status == "complete"

    J = 1.05
    stretched = PlateSpec(shape="rectangle", a=5.0 * math.sqrt(J), c_bend=gga.c_bend, rho=gga.rho0 / J)
    N = dilatation_membrane_stress(J, gga)
    _, omega2 = result.history("(1,1)")
    assert math.sqrt(omega2[-1]) == pytest.approx(rect_prestressed_frequency(1, 1, stretched, N, N), rel=2e-2)


def test_adhesion_sweep_on_supported_disk_flags_an_instability(tmp_path):
    outcome = run_scenario(load_run_config(CONFIG_DIR / "disk_adhesion.json"), tmp_path)
    assert outcome.status == "unstable"
    assert outcome.result.instabilities
    assert all(0.0 <= item.parameter <= 0.1 for item in outcome.result.instabilities)
