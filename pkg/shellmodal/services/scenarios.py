"""
Scenario Runner Service.
Turns a validated RunConfig into a model, load program and adhesion setup,
runs the continuation (or the analytical table) and writes the artifacts:
frequencies.csv, modes_step####.vtk, manifest.json and optional Matrix Market dumps.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from ..config import RUNS_DIR, RunConfig, load_run_config
from ..core.assembly import apply_dirichlet
from ..core.contact import AdhesionParams, SubstrateProfile, cavity_profile
from ..core.discretization import ShellModel, make_cnt, make_disk, make_square_plate
from ..core.material import MaterialParams
from ..errors import ConfigError, ShellModalError
from ..utils.export import dump_matrices, emit_mode_vtk, frequency_rows, write_frequency_csv, write_manifest
from .analytical import PlateSpec, frequency_table
from .classification import classifier_for
from .solvers import (
    ContinuationOptions,
    LoadProgram,
    ModalResult,
    ModalStep,
    NewtonOptions,
    adhesion_at,
    check_program,
    equilibrium_system,
    run_continuation,
)

logger = logging.getLogger(__name__)

TABLE_COLUMNS = ("m", "n", "gamma", "omega", "f_THz")
STATUS_EXIT = {"complete": 0, "unstable": 0, "failed": 3}


@dataclass
class RunOutcome:
    """What a run produced, for the CLI summary."""

    config: Optional[RunConfig]
    status: str = "complete"
    exit_status: int = 0
    message: str = ""
    module: str = ""
    directory: Optional[Path] = None
    result: Optional[ModalResult] = None
    table: List[Dict[str, float]] = field(default_factory=list)
    files: List[Path] = field(default_factory=list)
    wall_time_s: float = 0.0


# ==========================================
# Building blocks
# ==========================================
def material_params(config: RunConfig) -> MaterialParams:
    """Preset parameters with the density and optional bending override of the config."""
    material = config.material
    params = MaterialParams.from_presets(material.membrane, material.bending, rho0=material.rho0)
    if material.c_bend_nN_nm is not None:
        params = params.with_bending(material.c_bend_nN_nm)
    return params


def build_model(config: RunConfig, params: Optional[MaterialParams] = None) -> ShellModel:
    """Shell model of the configured geometry."""
    geometry = config.geometry
    params = params or material_params(config)
    angle = math.radians(geometry.armchair_angle_deg)
    armchair = (math.cos(angle), math.sin(angle), 0.0)
    if geometry.kind == "plate":
        return make_square_plate(
            geometry.edge_length_nm,
            geometry.elements,
            geometry.degree,
            params,
            boundary=geometry.boundary,
            armchair=armchair,
            penalty_factor=geometry.penalty_factor,
        )
    if geometry.kind == "disk":
        return make_disk(
            geometry.radius_nm,
            geometry.elements[0],
            geometry.degree,
            params,
            boundary=geometry.boundary,
            armchair=armchair,
            penalty_factor=geometry.penalty_factor,
        )
    return make_cnt(geometry.chirality, geometry.aspect_ratio, geometry.elements, geometry.degree, params, boundary=geometry.boundary)


def load_program(config: RunConfig) -> LoadProgram:
    """Configured program; modal scenarios get a single point at the unloaded state."""
    load = config.load
    if load.kind == "none":
        gamma = config.adhesion.gamma_N_per_m
        return LoadProgram(kind="adhesion", start=gamma, end=gamma, steps=1)
    return LoadProgram(
        kind=load.kind,
        start=load.start,
        end=load.end,
        steps=load.steps,
        direction=load.direction,
        adaptive=load.adaptive,
        min_step_fraction=load.min_step_fraction,
    )


def adhesion_params(config: RunConfig, model: ShellModel) -> Optional[AdhesionParams]:
    """Substrate below the sheet at distance gap_nm; None when no adhesion can act."""
    adhesion = config.adhesion
    if config.load.kind != "adhesion" and adhesion.gamma_N_per_m == 0.0:
        return None
    z_s = float(model.ref_points[:, 2].min()) - adhesion.gap_nm
    if adhesion.profile == "cavity":
        X = model.ref_points
        center = 0.5 * (X[:, :2].min(axis=0) + X[:, :2].max(axis=0))
        profile = cavity_profile(adhesion.cavity_radius_nm, adhesion.fillet_radius_nm, z_s=z_s, center=tuple(center))
    else:
        profile = SubstrateProfile(kind="flat", z_s=z_s)
    return AdhesionParams(Gamma=adhesion.gamma_N_per_m, h0=adhesion.h0_nm, profile=profile)


def continuation_options(config: RunConfig) -> ContinuationOptions:
    solver = config.solver
    return ContinuationOptions(
        n_modes=solver.n_modes,
        shift=solver.shift,
        mac_threshold=solver.mac_threshold,
        dip_fraction=solver.dip_fraction,
        stop_on_crossing=solver.stop_on_crossing,
        newton=NewtonOptions(max_iterations=solver.max_iterations, rtol=solver.rtol, atol=solver.atol_nN),
    )


def output_directory(config: RunConfig, override: Optional[Path] = None) -> Path:
    if override is not None:
        return Path(override)
    if config.output.directory is not None:
        return Path(config.output.directory).expanduser()
    return RUNS_DIR / config.name


def plate_spec(config: RunConfig, params: Optional[MaterialParams] = None) -> PlateSpec:
    """Analytical counterpart of a plate or disk geometry."""
    params = params or material_params(config)
    geometry = config.geometry
    if geometry.kind == "plate":
        return PlateSpec.from_params("rectangle", geometry.edge_length_nm, params)
    return PlateSpec.from_params("circle", geometry.radius_nm, params, boundary=geometry.boundary)


# ==========================================
# Scenarios
# ==========================================
def _run_table(config: RunConfig, outcome: RunOutcome, directory: Path):
    spec = plate_spec(config)
    outcome.table = frequency_table(spec, config.table.modes)
    outcome.files.append(write_frequency_csv(outcome.table, directory / "frequencies.csv", TABLE_COLUMNS))


def _step_writer(model: ShellModel, config: RunConfig, directory: Path, files: List[Path]) -> Callable[[ModalStep], None]:
    """Writes the VTK file of each finished step as soon as it exists."""

    def write(step: ModalStep):
        if not config.output.vtk:
            return
        count = min(config.output.vtk_modes, step.modes.shape[1])
        path = directory / f"modes_step{step.index:04d}.vtk"
        files.append(
            emit_mode_vtk(
                model,
                step.modes[:, :count],
                path,
                config.output.vtk_resolution,
                u=step.u,
                names=step.labels[:count],
                title=f"{config.name} step {step.index} parameter {step.parameter:.10g}",
            )
        )

    return write


def _dump_step(model, program, adhesion, step: ModalStep, directory: Path) -> Tuple[Path, Path]:
    system = apply_dirichlet(model, equilibrium_system(model, step.u, adhesion_at(program, step.parameter, adhesion)))
    return dump_matrices(directory, system.K, system.M, prefix=f"step{step.index:04d}_")


def _run_modal(
    config: RunConfig,
    model: ShellModel,
    program: LoadProgram,
    outcome: RunOutcome,
    directory: Path,
    on_step: Optional[Callable[[ModalStep], None]],
):
    adhesion = adhesion_params(config, model)
    logger.info("%s: %s model with %d dofs (%d free)", config.name, model.kind, model.n_dofs, model.free_dofs.size)

    steps: List[ModalStep] = []
    writer = _step_writer(model, config, directory, outcome.files)

    def record(step: ModalStep):
        steps.append(step)
        writer(step)
        if on_step:
            on_step(step)

    try:
        result = run_continuation(model, program, continuation_options(config), adhesion, classifier_for(model), record)
    except ShellModalError:
        # keep what was computed before the failure
        outcome.result = ModalResult(program=program, steps=steps, status="failed")
        _write_frequencies(outcome, directory)
        raise
    outcome.result = result
    _write_frequencies(outcome, directory)
    if config.output.dump_matrices and result.steps:
        for step in {result.steps[0].index: result.steps[0], result.steps[-1].index: result.steps[-1]}.values():
            outcome.files.extend(_dump_step(model, program, adhesion, step, directory))
    outcome.status = result.status
    outcome.message = result.message


def _write_frequencies(outcome: RunOutcome, directory: Path):
    if outcome.result is not None and outcome.result.steps:
        outcome.files.append(write_frequency_csv(frequency_rows(outcome.result), directory / "frequencies.csv"))


def _summary(outcome: RunOutcome) -> Dict:
    summary = {"status": outcome.status, "exit_status": outcome.exit_status, "message": outcome.message}
    if outcome.module:
        summary["module"] = outcome.module
    if outcome.result is not None:
        summary["steps"] = len(outcome.result.steps)
        summary["instabilities"] = [
            {"label": item.label, "parameter": item.parameter, "kind": item.kind} for item in outcome.result.instabilities
        ]
    if outcome.table:
        summary["rows"] = len(outcome.table)
    summary["files"] = sorted(path.name for path in outcome.files)
    return summary


def run_scenario(
    config: RunConfig,
    output_dir: Optional[Path] = None,
    on_step: Optional[Callable[[ModalStep], None]] = None,
) -> RunOutcome:
    """
    Run one validated configuration and write its artifacts.

    Solver failures are caught: the outcome carries status "failed" and exit 3,
    and everything written before the failure stays on disk together with
    the manifest.

    Args:
        config: Validated run configuration
        output_dir: Overrides the configured output directory
        on_step: Progress callback for every finished step

    Returns:
        RunOutcome

    Raises:
        ConfigError: for load programs the model cannot carry (nothing written)
    """
    directory = output_directory(config, output_dir)
    outcome = RunOutcome(config=config, directory=directory)
    started = time.perf_counter()
    try:
        if config.scenario == "analytical-table":
            directory.mkdir(parents=True, exist_ok=True)
            _run_table(config, outcome, directory)
        else:
            model = build_model(config)
            program = load_program(config)
            check_program(model, program)
            directory.mkdir(parents=True, exist_ok=True)
            _run_modal(config, model, program, outcome, directory, on_step)
    except ConfigError:
        raise
    except ShellModalError as exc:
        outcome.status = "failed"
        outcome.message = exc.message
        outcome.module = exc.module
        logger.error("%s failed: %s", config.name, exc)
    outcome.exit_status = 3 if outcome.status == "failed" else STATUS_EXIT.get(outcome.status, 0)
    outcome.wall_time_s = time.perf_counter() - started
    outcome.files.append(write_manifest(directory / "manifest.json", config.to_dict(), _summary(outcome), outcome.wall_time_s))
    return outcome


def run(config_path, output_dir: Optional[Path] = None, on_step: Optional[Callable[[ModalStep], None]] = None) -> RunOutcome:
    """
    Load, validate and run one configuration file.

    Returns:
        RunOutcome; exit_status is 0 on success, 2 on validation errors
        (nothing written) and 3 on solver failures (partial outputs kept)
    """
    try:
        config = load_run_config(config_path)
        return run_scenario(config, output_dir, on_step)
    except ConfigError as exc:
        logger.error("invalid configuration %s: %s", config_path, exc)
        return RunOutcome(config=None, status="invalid", exit_status=exc.exit_status, message=exc.message, module=exc.module)


def run_worker(config_path: str, output_dir: Optional[str] = None) -> Tuple[str, str, int, str]:
    """Process-pool entry: (path, status, exit status, message) of one run."""
    outcome = run(config_path, Path(output_dir) if output_dir else None)
    return str(config_path), outcome.status, outcome.exit_status, outcome.message

