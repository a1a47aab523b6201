"""
Mode Classification Module.
Names FE eigenvectors: (m,n) for plates, (m,n)c / (m,n)s for disks by MAC
against analytic shapes, and RB / TM / AM / BB / SH families for nanotubes
from their cylindrical components.
"""

import logging
import math
from collections import Counter
from typing import List, Optional, Tuple

import numpy as np

from ..core.discretization import ShellModel, evaluate_surface, sample_grid
from .analytical import PlateSpec, mode_shape_samples
from .solvers import ModalSolution, match_modes

logger = logging.getLogger(__name__)

SAMPLES = (41, 41)
CNT_SAMPLES = (48, 41)
SHAPE_THRESHOLD = 0.5
IN_PLANE_FRACTION = 0.5


def mode_fields(model: ShellModel, modes: np.ndarray, resolution: Tuple[int, int]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Sample reduced mode vectors on a parametric grid.

    Returns:
        Tuple of (points (npt, 3), displacements (k, npt, 3))
    """
    params = sample_grid(model.patch, resolution)
    points = evaluate_surface(model.patch, params)
    full = np.zeros((modes.shape[1], model.n_dofs))
    full[:, model.free_dofs] = modes.T
    fields = np.stack([evaluate_surface(model.patch, params, f.reshape(-1, 3)) for f in full])
    return points, fields


def _unique(labels: List[str]) -> List[str]:
    """Suffix repeated labels with /2, /3, ..."""
    seen = Counter()
    out = []
    for label in labels:
        seen[label] += 1
        out.append(label if seen[label] == 1 else f"{label}/{seen[label]}")
    return out


def _shape_labels(fields: np.ndarray, shapes: np.ndarray, names: List[str], fallback: List[str]) -> List[str]:
    """Greedy unique matching of sampled transverse fields against analytic shapes."""
    transverse = fields[:, :, 2].T
    assignment = match_modes(shapes.T, transverse, None, SHAPE_THRESHOLD)
    labels = []
    for j, i in enumerate(assignment):
        labels.append(names[i] if i >= 0 else fallback[j])
    return labels


def _in_plane(fields: np.ndarray) -> np.ndarray:
    energy = np.sum(fields ** 2, axis=1)
    total = energy.sum(axis=1)
    return (energy[:, 0] + energy[:, 1]) > IN_PLANE_FRACTION * np.maximum(total, 1e-300)


def classify_plate_modes(model: ShellModel, solution: ModalSolution, u: Optional[np.ndarray] = None, max_index: int = 6) -> List[str]:
    """(m,n) half-wave labels for square plates; IP for in-plane dominated modes."""
    edge = model.info.get("edge_length_nm", 1.0)
    spec = PlateSpec(shape="rectangle", a=edge, b=edge)
    points, fields = mode_fields(model, solution.modes, SAMPLES)
    names, shapes = [], []
    for m in range(1, max_index + 1):
        for n in range(1, max_index + 1):
            names.append(f"({m},{n})")
            shapes.append(mode_shape_samples(spec, m, n, points))
    labels = _shape_labels(fields, np.array(shapes), names, [f"mode{j + 1}" for j in range(fields.shape[0])])
    in_plane = _in_plane(fields)
    return _unique(["IP" if flag else label for label, flag in zip(labels, in_plane)])


def classify_disk_modes(model: ShellModel, solution: ModalSolution, u: Optional[np.ndarray] = None, m_max: int = 4, n_max: int = 3) -> List[str]:
    """(m,n) labels for disks, with c / s suffix for the cos / sin orientation when m > 0."""
    radius = model.info.get("radius_nm", 1.0)
    boundary = "clamped" if model.boundary == "clamped" else "simply-supported"
    spec = PlateSpec(shape="circle", a=radius, boundary=boundary)
    points, fields = mode_fields(model, solution.modes, SAMPLES)
    names, shapes = [], []
    for m in range(0, m_max + 1):
        for n in range(0, n_max + 1):
            if m == 0:
                names.append(f"(0,{n})")
                shapes.append(mode_shape_samples(spec, 0, n, points))
                continue
            for phase, tag in (("cos", "c"), ("sin", "s")):
                names.append(f"({m},{n}){tag}")
                shapes.append(mode_shape_samples(spec, m, n, points, phase))
    labels = _shape_labels(fields, np.array(shapes), names, [f"mode{j + 1}" for j in range(fields.shape[0])])
    in_plane = _in_plane(fields)
    return _unique(["IP" if flag else label for label, flag in zip(labels, in_plane)])


def cylindrical_components(points: np.ndarray, field: np.ndarray) -> np.ndarray:
    """(npt, 3) radial, circumferential and axial components about the z axis."""
    phi = np.arctan2(points[:, 1], points[:, 0])
    cos, sin = np.cos(phi), np.sin(phi)
    radial = field[:, 0] * cos + field[:, 1] * sin
    hoop = -field[:, 0] * sin + field[:, 1] * cos
    return np.column_stack([radial, hoop, field[:, 2]])


def _wave_number(ring: np.ndarray) -> int:
    """Dominant circumferential harmonic of values sampled on a closed ring."""
    spectrum = np.abs(np.fft.rfft(ring, axis=0)) ** 2
    power = spectrum.sum(axis=1) if spectrum.ndim > 1 else spectrum
    return int(np.argmax(power))


def _half_waves(profile: np.ndarray) -> int:
    """Axial half-wave count of an envelope sampled along the tube."""
    scale = np.max(np.abs(profile))
    if scale == 0.0:
        return 1
    signs = np.sign(profile[np.abs(profile) > 1e-3 * scale])
    return int(np.count_nonzero(np.diff(signs))) + 1


def cnt_signature(points: np.ndarray, field: np.ndarray, resolution: Tuple[int, int]) -> Tuple[str, int, int]:
    """
    Family, circumferential wave number and axial half-wave count of one CNT mode.

    Families: RB radial breathing, TM torsion, AM axial, BB beam bending
    (wave number 1) and SH shell modes (wave number >= 2).
    """
    n_circ, n_axial = resolution
    comps = cylindrical_components(points, field).reshape(n_circ, n_axial, 3)
    ring = comps[:-1]      # drop the repeated seam sample
    wave = _wave_number(ring.reshape(ring.shape[0], -1))
    if wave == 0:
        energy = np.sum(ring ** 2, axis=(0, 1))
        component = int(np.argmax(energy))
        family = ("RB", "TM", "AM")[component]
        profile = ring[:, :, component].mean(axis=0)
        return family, wave, _half_waves(profile)

    family = "BB" if wave == 1 else "SH"
    phi = np.arctan2(points[:, 1], points[:, 0]).reshape(n_circ, n_axial)[:-1, 0]
    radial = ring[:, :, 0]
    a = np.cos(wave * phi) @ radial
    b = np.sin(wave * phi) @ radial
    # signed axial envelope in the orientation of the strongest station
    station = int(np.argmax(a ** 2 + b ** 2))
    phase = math.atan2(b[station], a[station])
    profile = math.cos(phase) * a + math.sin(phase) * b
    return family, wave, _half_waves(profile)


def classify_cnt_modes(model: ShellModel, solution: ModalSolution, u: Optional[np.ndarray] = None) -> List[str]:
    """
    Family labels numbered by order of appearance, e.g. RB1, BB1, BB2, SH1.

    Modes sharing a signature (degenerate pairs) share the number and are
    made unique with a /2 suffix.
    """
    points, fields = mode_fields(model, solution.modes, CNT_SAMPLES)
    signatures = [cnt_signature(points, f, CNT_SAMPLES) for f in fields]
    numbering = {}
    counters = Counter()
    labels = []
    for signature in signatures:
        if signature not in numbering:
            counters[signature[0]] += 1
            numbering[signature] = counters[signature[0]]
        labels.append(f"{signature[0]}{numbering[signature]}")
    logger.debug("CNT mode signatures: %s", signatures)
    return _unique(labels)


def classifier_for(model: ShellModel):
    """Classifier matching the model kind."""
    return {"plate": classify_plate_modes, "disk": classify_disk_modes, "cnt": classify_cnt_modes}[model.kind]
