"""
Configuration management module.
Handles paths, run-configuration files and their schema.

Run configurations are JSON documents. Every physical quantity carries its
unit in the key name (edge_length_nm, gamma_N_per_m, ...). Unknown keys are
rejected and all defaults are filled in before anything is computed.
"""

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from .errors import ConfigError

# Data directory for histories and run outputs
# Uses user's Documents folder if available, otherwise home directory
DATA_DIR = Path.home() / "Documents" / "shellmodal"
if not DATA_DIR.parent.exists():
    DATA_DIR = Path.home() / "shellmodal"

RUNS_DIR = DATA_DIR / "runs"
CLI_HISTORY_FILE = DATA_DIR / "shellmodal_cli_history.txt"

SCENARIOS = (
    "plate-modal",
    "disk-modal",
    "cnt-modal",
    "dilatation-sweep",
    "uniaxial-sweep",
    "compression-sweep",
    "adhesion-sweep",
    "analytical-table",
)
GEOMETRY_KINDS = ("plate", "disk", "cnt")
DEFAULT_BOUNDARY = {"plate": "simply-supported", "disk": "clamped", "cnt": "free"}
SCENARIO_GEOMETRY = {"plate-modal": "plate", "disk-modal": "disk", "cnt-modal": "cnt", "compression-sweep": "cnt"}
SCENARIO_LOAD = {
    "dilatation-sweep": ("area_stretch", 1.0, 1.43, 20),
    "uniaxial-sweep": ("uniaxial", 1.0, 1.2, 20),
    "compression-sweep": ("axial_strain", 0.0, -0.1, 40),
    "adhesion-sweep": ("adhesion", 0.0, 0.1, 20),
}


def ensure_data_dir() -> Path:
    """Create the data directory tree if needed."""
    RUNS_DIR.mkdir(parents=True, exist_ok=True)
    return DATA_DIR


def ensure_history_file() -> None:
    """Ensure CLI history file exists"""
    ensure_data_dir()
    if not CLI_HISTORY_FILE.exists():
        CLI_HISTORY_FILE.touch()


# ==========================================
# Schema helpers
# ==========================================
def _build(cls, data: Optional[Dict[str, Any]], path: str):
    """Instantiate a config dataclass from a mapping, rejecting unknown keys."""
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"'{path}' must be an object, got {type(data).__name__}")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown key(s) in '{path}': {', '.join(unknown)} (allowed: {', '.join(sorted(known))})")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(f"invalid '{path}' block: {exc}") from exc


def _number(value, name: str, positive: bool = False, non_negative: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"'{name}' must be a finite number, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(f"'{name}' must be positive, got {value}")
    if non_negative and value < 0:
        raise ConfigError(f"'{name}' must be non-negative, got {value}")
    return float(value)


def _integer(value, name: str, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"'{name}' must be an integer >= {minimum}, got {value!r}")
    return value


def _pair(value, name: str, minimum: int) -> Tuple[int, int]:
    if isinstance(value, int) and not isinstance(value, bool):
        value = [value, value]
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(f"'{name}' must be a pair of integers, got {value!r}")
    return _integer(value[0], name, minimum), _integer(value[1], name, minimum)


def _choice(value, name: str, options) -> str:
    if value not in options:
        raise ConfigError(f"'{name}' must be one of {', '.join(options)}, got {value!r}")
    return value


def _flag(value, name: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"'{name}' must be true or false, got {value!r}")
    return value


# ==========================================
# Config blocks
# ==========================================
@dataclass(frozen=True)
class GeometryConfig:
    kind: str = "plate"
    edge_length_nm: float = 5.0
    radius_nm: float = 5.0
    chirality: Tuple[int, int] = (10, 10)
    aspect_ratio: float = 5.669
    elements: Tuple[int, int] = (20, 20)
    degree: int = 2
    boundary: Optional[str] = None
    penalty_factor: float = 1e3
    armchair_angle_deg: float = 0.0

    def __post_init__(self):
        _choice(self.kind, "geometry.kind", GEOMETRY_KINDS)
        _number(self.edge_length_nm, "geometry.edge_length_nm", positive=True)
        _number(self.radius_nm, "geometry.radius_nm", positive=True)
        _number(self.aspect_ratio, "geometry.aspect_ratio", positive=True)
        _number(self.penalty_factor, "geometry.penalty_factor", positive=True)
        _number(self.armchair_angle_deg, "geometry.armchair_angle_deg")
        _integer(self.degree, "geometry.degree", 2)
        object.__setattr__(self, "elements", _pair(self.elements, "geometry.elements", 2))
        chirality = _pair(self.chirality, "geometry.chirality", 0)
        if chirality == (0, 0):
            raise ConfigError("'geometry.chirality' must not be (0, 0)")
        object.__setattr__(self, "chirality", chirality)
        if self.boundary is None:
            object.__setattr__(self, "boundary", DEFAULT_BOUNDARY[self.kind])
        _choice(self.boundary, "geometry.boundary", ("simply-supported", "clamped", "free"))
        if self.kind == "disk" and self.elements[0] != self.elements[1]:
            raise ConfigError("disk meshes need equal element counts in both directions")
        if self.kind == "disk" and self.degree != 2:
            raise ConfigError("the rational disk patch is quadratic; use geometry.degree = 2")
        if self.kind == "cnt" and self.boundary == "clamped":
            raise ConfigError("CNT ends support 'free' or 'simply-supported' only")


@dataclass(frozen=True)
class MaterialConfig:
    membrane: str = "GGA"
    bending: str = "QM"
    c_bend_nN_nm: Optional[float] = None
    density_kg_per_m2: float = 0.76106e-6

    def __post_init__(self):
        _choice(self.membrane, "material.membrane", ("GGA", "LDA"))
        _choice(self.bending, "material.bending", ("FGBP", "SGBP", "QM"))
        if self.c_bend_nN_nm is not None:
            _number(self.c_bend_nN_nm, "material.c_bend_nN_nm", positive=True)
        _number(self.density_kg_per_m2, "material.density_kg_per_m2", positive=True)

    @property
    def rho0(self) -> float:
        """Density in 1e-24 kg / nm^2."""
        return self.density_kg_per_m2 * 1e6


@dataclass(frozen=True)
class LoadConfig:
    """Load program; start and end are stretches, strains, or Gamma in N/m for adhesion."""

    kind: Optional[str] = None
    start: Optional[float] = None
    end: Optional[float] = None
    steps: Optional[int] = None
    direction: str = "armchair"
    adaptive: bool = True
    min_step_fraction: float = 1e-4

    def __post_init__(self):
        if self.kind is not None:
            _choice(self.kind, "load.kind", ("none", "area_stretch", "uniaxial", "axial_strain", "adhesion"))
        for name in ("start", "end"):
            value = getattr(self, name)
            if value is not None:
                _number(value, f"load.{name}")
        if self.steps is not None:
            _integer(self.steps, "load.steps", 1)
        _choice(self.direction, "load.direction", ("armchair", "zigzag", "chiral"))
        _flag(self.adaptive, "load.adaptive")
        _number(self.min_step_fraction, "load.min_step_fraction", positive=True)


@dataclass(frozen=True)
class AdhesionConfig:
    gamma_N_per_m: float = 0.0
    h0_nm: float = 0.34
    gap_nm: Optional[float] = None
    profile: str = "flat"
    cavity_radius_nm: float = 450.0
    fillet_radius_nm: float = 50.0

    def __post_init__(self):
        _number(self.gamma_N_per_m, "adhesion.gamma_N_per_m", non_negative=True)
        _number(self.h0_nm, "adhesion.h0_nm", positive=True)
        if self.gap_nm is None:
            object.__setattr__(self, "gap_nm", self.h0_nm)
        _number(self.gap_nm, "adhesion.gap_nm", positive=True)
        _choice(self.profile, "adhesion.profile", ("flat", "cavity"))
        _number(self.cavity_radius_nm, "adhesion.cavity_radius_nm", positive=True)
        _number(self.fillet_radius_nm, "adhesion.fillet_radius_nm", positive=True)


@dataclass(frozen=True)
class SolverConfig:
    n_modes: int = 10
    shift: float = 0.0
    max_iterations: int = 30
    rtol: float = 1e-10
    atol_nN: float = 1e-12
    mac_threshold: float = 0.6
    dip_fraction: float = 1e-3
    stop_on_crossing: bool = False

    def __post_init__(self):
        _integer(self.n_modes, "solver.n_modes", 1)
        _number(self.shift, "solver.shift")
        _integer(self.max_iterations, "solver.max_iterations", 1)
        _number(self.rtol, "solver.rtol", positive=True)
        _number(self.atol_nN, "solver.atol_nN", positive=True)
        if not 0.0 < _number(self.mac_threshold, "solver.mac_threshold") <= 1.0:
            raise ConfigError("'solver.mac_threshold' must lie in (0, 1]")
        _number(self.dip_fraction, "solver.dip_fraction", positive=True)
        _flag(self.stop_on_crossing, "solver.stop_on_crossing")


@dataclass(frozen=True)
class TableConfig:
    modes: int = 9

    def __post_init__(self):
        _integer(self.modes, "table.modes", 1)


@dataclass(frozen=True)
class OutputConfig:
    directory: Optional[str] = None
    vtk: bool = True
    vtk_modes: int = 4
    vtk_resolution: Tuple[int, int] = (41, 41)
    dump_matrices: bool = False

    def __post_init__(self):
        if self.directory is not None and not isinstance(self.directory, str):
            raise ConfigError("'output.directory' must be a string")
        _flag(self.vtk, "output.vtk")
        _integer(self.vtk_modes, "output.vtk_modes", 1)
        object.__setattr__(self, "vtk_resolution", _pair(self.vtk_resolution, "output.vtk_resolution", 2))
        _flag(self.dump_matrices, "output.dump_matrices")


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run configuration."""

    scenario: str
    name: str = "run"
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    material: MaterialConfig = field(default_factory=MaterialConfig)
    load: LoadConfig = field(default_factory=LoadConfig)
    adhesion: AdhesionConfig = field(default_factory=AdhesionConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    table: TableConfig = field(default_factory=TableConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def __post_init__(self):
        _choice(self.scenario, "scenario", SCENARIOS)
        if not isinstance(self.name, str) or not self.name:
            raise ConfigError("'name' must be a non-empty string")
        expected = SCENARIO_GEOMETRY.get(self.scenario)
        if expected and self.geometry.kind != expected:
            raise ConfigError(f"scenario '{self.scenario}' needs geometry.kind = '{expected}'")
        if self.scenario == "compression-sweep" and self.geometry.boundary == "free":
            raise ConfigError("compression needs geometry.boundary = 'simply-supported'")
        if self.scenario == "analytical-table" and self.geometry.kind == "cnt":
            raise ConfigError("analytical tables cover plates and disks only")
        if self.scenario == "analytical-table" and self.geometry.kind == "plate" and self.geometry.boundary != "simply-supported":
            raise ConfigError("analytical plate tables need geometry.boundary = 'simply-supported'")
        if self.scenario == "analytical-table" and self.geometry.boundary == "free":
            raise ConfigError("free plates have no analytical table")
        object.__setattr__(self, "load", self._resolved_load())

    def _resolved_load(self) -> LoadConfig:
        load = self.load
        defaults = SCENARIO_LOAD.get(self.scenario)
        if defaults is None:
            if load.kind not in (None, "none"):
                raise ConfigError(f"scenario '{self.scenario}' takes no load program")
            return replace(load, kind="none", start=None, end=None, steps=None)
        kind, start, end, steps = defaults
        if load.kind not in (None, kind):
            raise ConfigError(f"scenario '{self.scenario}' uses load.kind = '{kind}'")
        return replace(
            load,
            kind=kind,
            start=start if load.start is None else load.start,
            end=end if load.end is None else load.end,
            steps=steps if load.steps is None else load.steps,
        )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        """Validate a raw mapping into a RunConfig."""
        if not isinstance(data, dict):
            raise ConfigError("configuration root must be an object")
        blocks = {
            "geometry": GeometryConfig,
            "material": MaterialConfig,
            "load": LoadConfig,
            "adhesion": AdhesionConfig,
            "solver": SolverConfig,
            "table": TableConfig,
            "output": OutputConfig,
        }
        allowed = set(blocks) | {"scenario", "name"}
        unknown = sorted(set(data) - allowed)
        if unknown:
            raise ConfigError(f"unknown top-level key(s): {', '.join(unknown)}")
        if "scenario" not in data:
            raise ConfigError("missing required key 'scenario'")
        geometry = dict(data.get("geometry") or {})
        if "kind" not in geometry and data["scenario"] in SCENARIO_GEOMETRY:
            geometry["kind"] = SCENARIO_GEOMETRY[data["scenario"]]
        if data["scenario"] == "compression-sweep":
            geometry.setdefault("boundary", "simply-supported")
        built = {name: _build(block, geometry if name == "geometry" else data.get(name), name) for name, block in blocks.items()}
        return cls(scenario=data["scenario"], name=data.get("name", "run"), **built)

    def to_dict(self) -> Dict[str, Any]:
        """All keys with resolved defaults, JSON-ready."""
        return json.loads(json.dumps(asdict(self)))


def load_run_config(path) -> RunConfig:
    """
    Read and validate a JSON run configuration.

    Args:
        path: Path to the config file

    Returns:
        RunConfig

    Raises:
        ConfigError: if the file is unreadable, malformed or invalid
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config '{path}': {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in '{path}' (line {exc.lineno}): {exc.msg}") from exc
    if isinstance(data, dict) and "name" not in data:
        data["name"] = path.stem
    return RunConfig.from_dict(data)
