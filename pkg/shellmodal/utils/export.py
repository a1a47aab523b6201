"""
Result export: frequency tables (CSV), mode shapes (legacy ASCII VTK),
run manifests (JSON) and Matrix Market dumps.
"""

import csv
import json
import logging
import platform
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy
import scipy.io
import sympy

from .. import __version__
from ..core.discretization import ShellModel, evaluate_surface, sample_grid
from .formatting import format_full_precision, signed_frequency

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("step", "parameter", "label", "f_THz", "omega2", "unstable", "f_normalized")


# ==========================================
# CSV
# ==========================================
def frequency_rows(result) -> List[Dict[str, Any]]:
    """
    Flatten a ModalResult into one row per (step, mode).

    f_normalized divides by the lowest positive frequency of the first step.
    """
    reference = result.reference_frequency()
    rows = []
    for step in result.steps:
        for label, omega2 in zip(step.labels, step.omega2):
            f = signed_frequency(omega2)
            rows.append(
                {
                    "step": step.index,
                    "parameter": step.parameter,
                    "label": label,
                    "f_THz": f,
                    "omega2": float(omega2),
                    "unstable": int(omega2 < 0.0),
                    "f_normalized": f / reference if reference == reference and reference > 0.0 else float("nan"),
                }
            )
    return rows


def write_frequency_csv(rows: Iterable[Dict[str, Any]], path, columns: Sequence[str] = CSV_COLUMNS) -> Path:
    """Write rows with floats at 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_full_precision(v) if isinstance(v, float) else v for v in (row[c] for c in columns)])
    logger.info("wrote %s", path)
    return path


# ==========================================
# Legacy VTK
# ==========================================
def _full_vector(model: ShellModel, vector: np.ndarray) -> np.ndarray:
    vector = np.asarray(vector, dtype=float)
    if vector.shape[0] == model.n_dofs:
        return vector
    if vector.shape[0] == model.free_dofs.shape[0]:
        full = np.zeros(model.n_dofs)
        full[model.free_dofs] = vector
        return full
    raise ValueError(f"mode vector of length {vector.shape[0]} matches neither {model.n_dofs} nor the free dofs")


def _grid_order(values: np.ndarray, resolution: Tuple[int, int]) -> np.ndarray:
    """Reorder v-fastest samples into the i-fastest order of VTK structured grids."""
    nu, nv = resolution
    return values.reshape((nu, nv) + values.shape[1:]).swapaxes(0, 1).reshape(values.shape)


def emit_mode_vtk(
    model: ShellModel,
    modes: Optional[np.ndarray],
    path,
    resolution: Tuple[int, int] = (41, 41),
    u: Optional[np.ndarray] = None,
    names: Optional[Sequence[str]] = None,
    title: str = "shellmodal mode shapes",
) -> Path:
    """
    Write sampled mode shapes on the (deformed) surface as a legacy ASCII STRUCTURED_GRID.

    The first mode is stored as `mode_displacement` and `mode_magnitude`; further
    columns of modes get a `_<name>` suffix.

    Args:
        model: Shell model
        modes: Mode vector(s), reduced or full, shape (n,) or (n, k); None writes geometry only
        path: Output file
        resolution: Samples per parametric direction
        u: Equilibrium displacement the modes are taken about
        names: Suffixes for modes after the first

    Returns:
        Path written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    params = sample_grid(model.patch, resolution)
    values = model.ref_points if u is None else model.current_points(u)
    points = _grid_order(evaluate_surface(model.patch, params, values), resolution)

    fields = []
    if modes is not None:
        modes = np.asarray(modes, dtype=float)
        modes = modes[:, None] if modes.ndim == 1 else modes
        for k in range(modes.shape[1]):
            full = _full_vector(model, modes[:, k]).reshape(-1, 3)
            sampled = _grid_order(evaluate_surface(model.patch, params, full), resolution)
            if k == 0:
                suffix = ""
            else:
                suffix = "_" + (names[k] if names is not None and k < len(names) else str(k + 1))
            fields.append((suffix, sampled))

    n = points.shape[0]
    with open(path, "w", encoding="utf-8") as f:
        f.write("# vtk DataFile Version 3.0\n")
        f.write(f"{title}\n")
        f.write("ASCII\n")
        f.write("DATASET STRUCTURED_GRID\n")
        f.write(f"DIMENSIONS {resolution[0]} {resolution[1]} 1\n")
        f.write(f"POINTS {n} double\n")
        np.savetxt(f, points, fmt="%.10e")
        if fields:
            f.write(f"POINT_DATA {n}\n")
        for suffix, sampled in fields:
            safe = suffix.replace(" ", "_").replace("(", "").replace(")", "").replace(",", "_").replace("/", "_")
            f.write(f"VECTORS mode_displacement{safe} double\n")
            np.savetxt(f, sampled, fmt="%.10e")
            f.write(f"SCALARS mode_magnitude{safe} double 1\n")
            f.write("LOOKUP_TABLE default\n")
            np.savetxt(f, np.linalg.norm(sampled, axis=1), fmt="%.10e")
    logger.info("wrote %s", path)
    return path


# ==========================================
# Manifest and matrices
# ==========================================
def environment_versions() -> Dict[str, str]:
    return {
        "shellmodal": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "sympy": sympy.__version__,
    }


def write_manifest(path, config: Dict[str, Any], summary: Dict[str, Any], wall_time_s: float) -> Path:
    """JSON manifest: resolved config, library versions, wall time and run summary."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    manifest = {
        "config": config,
        "versions": environment_versions(),
        "wall_time_s": wall_time_s,
        "summary": summary,
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, default=_json_default)
        f.write("\n")
    logger.info("wrote %s", path)
    return path


def read_manifest(path) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def dump_matrices(directory, K, M, prefix: str = "") -> Tuple[Path, Path]:
    """Matrix Market files of the reduced stiffness and mass."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    k_path = directory / f"{prefix}K.mtx"
    m_path = directory / f"{prefix}M.mtx"
    scipy.io.mmwrite(str(k_path), K, symmetry="general")
    scipy.io.mmwrite(str(m_path), M, symmetry="general")
    logger.info("wrote %s and %s", k_path, m_path)
    return k_path, m_path
