import csv
import json

import pytest

from shellmodal.config import RunConfig
from shellmodal.errors import ConvergenceError
from shellmodal.services import scenarios
from shellmodal.services.scenarios import adhesion_params, build_model, load_program, run, run_scenario
from shellmodal.utils.export import read_manifest


def small_plate(**overrides):
    data = {
        "scenario": "plate-modal",
        "name": "small",
        "geometry": {"elements": [4, 4]},
        "solver": {"n_modes": 3},
        "output": {"vtk_modes": 2, "vtk_resolution": [9, 9]},
    }
    data.update(overrides)
    return RunConfig.from_dict(data)


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


class TestBuildingBlocks:
    def test_models_follow_geometry(self):
        assert build_model(small_plate()).kind == "plate"
        disk = RunConfig.from_dict({"scenario": "disk-modal", "geometry": {"elements": [3, 3]}})
        assert build_model(disk).boundary == "clamped"

    def test_modal_scenarios_use_a_single_point(self):
        program = load_program(small_plate())
        assert program.kind == "adhesion"
        assert list(program.schedule()) == [0.0]

    def test_no_adhesion_without_gamma(self):
        config = small_plate()
        assert adhesion_params(config, build_model(config)) is None

    def test_substrate_sits_one_gap_below(self):
        config = RunConfig.from_dict({"scenario": "adhesion-sweep", "geometry": {"elements": [3, 3]}, "adhesion": {"gap_nm": 0.5}})
        adhesion = adhesion_params(config, build_model(config))
        assert adhesion.profile.z_s == pytest.approx(-0.5)
        assert adhesion.h0 == 0.34


class TestRuns:
    def test_analytical_table(self, tmp_path):
        config = RunConfig.from_dict({"scenario": "analytical-table", "name": "table"})
        outcome = run_scenario(config, tmp_path)
        assert outcome.exit_status == 0
        rows = read_rows(tmp_path / "frequencies.csv")
        assert len(rows) == 9
        assert float(rows[0]["f_THz"]) == pytest.approx(0.07027, rel=5e-4)
        assert float(rows[-1]["f_THz"]) == pytest.approx(0.59732, rel=5e-4)
        assert read_manifest(tmp_path / "manifest.json")["summary"]["rows"] == 9

    def test_plate_modal(self, tmp_path):
        outcome = run_scenario(small_plate(), tmp_path)
        assert (outcome.status, outcome.exit_status) == ("complete", 0)
        assert {path.name for path in outcome.files} == {"frequencies.csv", "modes_step0000.vtk", "manifest.json"}
        rows = read_rows(tmp_path / "frequencies.csv")
        assert len(rows) == 3
        assert rows[0]["label"] == "(1,1)"
        assert float(rows[0]["f_THz"]) == pytest.approx(0.07027, rel=5e-2)

        manifest = read_manifest(tmp_path / "manifest.json")
        assert manifest["config"]["geometry"]["elements"] == [4, 4]
        assert manifest["summary"]["status"] == "complete"
        assert manifest["summary"]["steps"] == 1

    def test_reruns_are_identical(self, tmp_path):
        run_scenario(small_plate(), tmp_path / "a")
        run_scenario(small_plate(), tmp_path / "b")
        first = (tmp_path / "a" / "frequencies.csv").read_text(encoding="utf-8")
        assert first == (tmp_path / "b" / "frequencies.csv").read_text(encoding="utf-8")

    def test_matrix_dump(self, tmp_path):
        config = small_plate(output={"vtk": False, "dump_matrices": True})
        outcome = run_scenario(config, tmp_path)
        assert {path.name for path in outcome.files} == {"frequencies.csv", "step0000_K.mtx", "step0000_M.mtx", "manifest.json"}

    def test_invalid_config_writes_nothing(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"scenario": "plate-modal", "solver": {"n_modes": 0}}), encoding="utf-8")
        outcome = run(path, tmp_path / "out")
        assert (outcome.status, outcome.exit_status) == ("invalid", 2)
        assert outcome.module == "config"
        assert not (tmp_path / "out").exists()

    def test_solver_failure_keeps_a_manifest(self, tmp_path, monkeypatch):
        def fail(*args, **kwargs):
            raise ConvergenceError("residual stalled at 1e-3")

        monkeypatch.setattr(scenarios, "run_continuation", fail)
        outcome = run_scenario(small_plate(), tmp_path)
        assert (outcome.status, outcome.exit_status) == ("failed", 3)
        summary = read_manifest(tmp_path / "manifest.json")["summary"]
        assert summary["status"] == "failed"
        assert summary["module"] == "solvers"
        assert summary["message"] == "residual stalled at 1e-3"
