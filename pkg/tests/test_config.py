import json
from pathlib import Path

import pytest

from shellmodal.config import RunConfig, load_run_config
from shellmodal.errors import ConfigError

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


class TestDefaults:
    def test_plate_modal(self):
        config = RunConfig.from_dict({"scenario": "plate-modal"})
        assert config.geometry.kind == "plate"
        assert config.geometry.boundary == "simply-supported"
        assert config.geometry.elements == (20, 20)
        assert config.load.kind == "none"
        assert config.solver.n_modes == 10
        assert config.material.rho0 == pytest.approx(0.76106)

    def test_sweep_defaults(self):
        config = RunConfig.from_dict({"scenario": "dilatation-sweep"})
        load = config.load
        assert (load.kind, load.start, load.end, load.steps) == ("area_stretch", 1.0, 1.43, 20)

    def test_sweep_override(self):
        config = RunConfig.from_dict({"scenario": "adhesion-sweep", "load": {"end": 0.05}})
        assert config.load.kind == "adhesion"
        assert config.load.end == 0.05
        assert config.load.steps == 20

    def test_compression_defaults_to_held_tube(self):
        config = RunConfig.from_dict({"scenario": "compression-sweep"})
        assert config.geometry.kind == "cnt"
        assert config.geometry.boundary == "simply-supported"

    def test_disk_defaults_to_clamped(self):
        assert RunConfig.from_dict({"scenario": "disk-modal"}).geometry.boundary == "clamped"

    def test_round_trip(self):
        config = RunConfig.from_dict(
            {"scenario": "uniaxial-sweep", "name": "u", "geometry": {"elements": [6, 8]}, "output": {"vtk_resolution": [9, 11]}}
        )
        data = json.loads(json.dumps(config.to_dict()))
        assert RunConfig.from_dict(data) == config


class TestValidation:
    @pytest.mark.parametrize(
        "data",
        [
            {},
            {"scenario": "modal"},
            {"scenario": "plate-modal", "colour": "red"},
            {"scenario": "plate-modal", "geometry": {"edge_length": 5.0}},
            {"scenario": "plate-modal", "geometry": {"edge_length_nm": -5.0}},
            {"scenario": "plate-modal", "geometry": {"elements": [1, 4]}},
            {"scenario": "plate-modal", "geometry": {"kind": "disk"}},
            {"scenario": "disk-modal", "geometry": {"degree": 3}},
            {"scenario": "disk-modal", "geometry": {"elements": [4, 6]}},
            {"scenario": "cnt-modal", "geometry": {"boundary": "clamped"}},
            {"scenario": "cnt-modal", "geometry": {"chirality": [0, 0]}},
            {"scenario": "compression-sweep", "geometry": {"boundary": "free"}},
            {"scenario": "analytical-table", "geometry": {"kind": "cnt"}},
            {"scenario": "analytical-table", "geometry": {"kind": "plate", "boundary": "clamped"}},
            {"scenario": "analytical-table", "table": {"modes": 0}},
            {"scenario": "analytical-table", "table": {"m_max": 3}},
            {"scenario": "plate-modal", "load": {"kind": "adhesion"}},
            {"scenario": "dilatation-sweep", "load": {"kind": "uniaxial"}},
            {"scenario": "plate-modal", "material": {"membrane": "PBE"}},
            {"scenario": "plate-modal", "solver": {"n_modes": True}},
            {"scenario": "plate-modal", "solver": {"mac_threshold": 1.5}},
            {"scenario": "plate-modal", "adhesion": {"gamma_N_per_m": -0.1}},
            {"scenario": "plate-modal", "output": {"vtk": "yes"}},
        ],
    )
    def test_rejected(self, data):
        with pytest.raises(ConfigError):
            RunConfig.from_dict(data)

    def test_root_must_be_object(self):
        with pytest.raises(ConfigError):
            RunConfig.from_dict(["plate-modal"])

    def test_error_names_the_key(self):
        with pytest.raises(ConfigError, match="geometry.edge_length_nm"):
            RunConfig.from_dict({"scenario": "plate-modal", "geometry": {"edge_length_nm": 0}})


class TestFiles:
    def test_name_defaults_to_file_stem(self, tmp_path):
        path = tmp_path / "square_plate.json"
        path.write_text(json.dumps({"scenario": "plate-modal"}), encoding="utf-8")
        assert load_run_config(path).name == "square_plate"

    def test_explicit_name_wins(self, tmp_path):
        path = tmp_path / "a.json"
        path.write_text(json.dumps({"scenario": "plate-modal", "name": "b"}), encoding="utf-8")
        assert load_run_config(path).name == "b"

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"scenario": ', encoding="utf-8")
        with pytest.raises(ConfigError, match="malformed JSON"):
            load_run_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_run_config(tmp_path / "absent.json")

    @pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.json")), ids=lambda p: p.stem)
    def test_shipped_configs_are_valid(self, path):
        config = load_run_config(path)
        assert config.name == path.stem
