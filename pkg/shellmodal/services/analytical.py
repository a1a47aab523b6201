"""
Analytical Plate Module.
Closed-form Canham plate frequencies: simply supported rectangles with and
without in-plane prestress, and clamped or simply supported circular plates
through their Bessel characteristic equations.

All lengths in nm, c in nN nm and rho in 1e-24 kg / nm^2, so omega comes out
in rad/ps and f = omega / 2 pi in THz.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional

import numpy as np
from scipy import optimize, special

from ..core.material import GRAPHENE_DENSITY, MaterialParams
from ..errors import AnalyticalError

logger = logging.getLogger(__name__)

SHAPES = ("rectangle", "circle")
BOUNDARIES = ("simply-supported", "clamped")
ROOT_XTOL = 1e-14
ROOT_RTOL = 1e-15


@dataclass(frozen=True)
class PlateSpec:
    """
    Plate geometry and Canham constants.

    For rectangles a and b are the full edge lengths; for circles a is the radius.
    """

    shape: str
    a: float
    b: Optional[float] = None
    boundary: str = "simply-supported"
    c_bend: float = 0.238
    rho: float = GRAPHENE_DENSITY

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise AnalyticalError(f"unknown plate shape '{self.shape}'")
        if self.boundary not in BOUNDARIES:
            raise AnalyticalError(f"unknown boundary '{self.boundary}'")
        if self.shape == "rectangle" and self.boundary == "clamped":
            raise AnalyticalError("clamped rectangles have no closed-form frequencies")
        if self.shape == "rectangle" and self.b is None:
            object.__setattr__(self, "b", self.a)
        for name in ("a", "c_bend", "rho") + (("b",) if self.shape == "rectangle" else ()):
            if not getattr(self, name) > 0.0:
                raise AnalyticalError(f"{name} must be positive, got {getattr(self, name)}")

    @classmethod
    def from_params(cls, shape: str, a: float, params: MaterialParams, b: Optional[float] = None, boundary: str = "simply-supported") -> "PlateSpec":
        return cls(shape=shape, a=a, b=b, boundary=boundary, c_bend=params.c_bend, rho=params.rho0)

    @property
    def wave_speed(self) -> float:
        """sqrt(c / rho) in nm^2 / ps."""
        return math.sqrt(self.c_bend / self.rho)


def to_thz(omega) -> float:
    """Angular frequency (rad/ps) to frequency (THz)."""
    return omega / (2.0 * math.pi)


# ==========================================
# Rectangular plates
# ==========================================
def _check_indices(m: int, n: int, lowest: int):
    if int(m) != m or int(n) != n or m < lowest or n < lowest:
        raise AnalyticalError(f"mode indices must be integers >= {lowest}, got ({m}, {n})")


def rect_ss_frequency(m: int, n: int, spec: PlateSpec) -> float:
    """omega_(m,n) = pi^2 (m^2 / a^2 + n^2 / b^2) sqrt(c / rho)."""
    _check_indices(m, n, 1)
    if spec.shape != "rectangle":
        raise AnalyticalError("rect_ss_frequency needs a rectangular plate")
    return math.pi ** 2 * (m ** 2 / spec.a ** 2 + n ** 2 / spec.b ** 2) * spec.wave_speed


def rect_prestressed_omega2(m: int, n: int, spec: PlateSpec, Nx: float, Ny: float) -> float:
    """omega^2 = omega_hat^2 + (Nx (pi m / a)^2 + Ny (pi n / b)^2) / rho."""
    omega_hat = rect_ss_frequency(m, n, spec)
    return omega_hat ** 2 + (Nx * (math.pi * m / spec.a) ** 2 + Ny * (math.pi * n / spec.b) ** 2) / spec.rho


def rect_prestressed_frequency(m: int, n: int, spec: PlateSpec, Nx: float, Ny: float) -> float:
    """
    Prestressed frequency as a signed value; negative means imaginary (unstable).

    Args:
        m, n: Half-wave numbers
        spec: Rectangular plate
        Nx, Ny: Cauchy membrane stresses in N/m (positive in tension)

    Returns:
        sign(omega^2) sqrt(|omega^2|) in rad/ps
    """
    omega2 = rect_prestressed_omega2(m, n, spec, Nx, Ny)
    return math.copysign(math.sqrt(abs(omega2)), omega2)


def dilatation_membrane_stress(J: float, params: MaterialParams) -> float:
    """
    Cauchy membrane stress of pure dilatation, N = eps alpha^2 ln J exp(-(1 + alpha) ln J).

    Args:
        J: Area stretch (> 0)
        params: Material parameters

    Returns:
        N in N/m
    """
    if not J > 0.0:
        raise AnalyticalError(f"area stretch must be positive, got {J}")
    ea = math.log(J)
    return params.epsilon * params.alpha_hat ** 2 * ea * math.exp(-(1.0 + params.alpha_hat) * ea)


# ==========================================
# Circular plates
# ==========================================
def clamped_characteristic(gamma, m: int):
    """J_{m+1} I_m + I_{m+1} J_m, zero where J_{m+1}/J_m + I_{m+1}/I_m = 0."""
    return special.jv(m + 1, gamma) * special.iv(m, gamma) + special.iv(m + 1, gamma) * special.jv(m, gamma)


def supported_characteristic(gamma, m: int):
    """J_{m+1}/J_m + I_{m+1}/I_m - 2 gamma (Canham simple support)."""
    return special.jv(m + 1, gamma) / special.jv(m, gamma) + special.iv(m + 1, gamma) / special.iv(m, gamma) - 2.0 * gamma


def characteristic(gamma, m: int, boundary: str):
    if boundary == "clamped":
        return clamped_characteristic(gamma, m)
    if boundary == "simply-supported":
        return supported_characteristic(gamma, m)
    raise AnalyticalError(f"unknown boundary '{boundary}'")


def _brentq(func, lo: float, hi: float, m: int) -> float:
    try:
        solution = optimize.root_scalar(func, args=(m,), bracket=[lo, hi], method="brentq", xtol=ROOT_XTOL, rtol=ROOT_RTOL)
    except ValueError as exc:
        raise AnalyticalError(f"root bracketing failed on [{lo:.6g}, {hi:.6g}] for m={m}: {exc}") from exc
    if not solution.converged:
        raise AnalyticalError(f"root polishing did not converge for m={m}: {solution.flag}")
    return float(solution.root)


@lru_cache(maxsize=None)
def _roots(m: int, n_max: int, boundary: str) -> tuple:
    zeros_m = special.jn_zeros(m, n_max)
    if boundary == "clamped":
        # one root between consecutive zeros of J_m and J_{m+1}
        zeros_next = special.jn_zeros(m + 1, n_max)
        return tuple(_brentq(clamped_characteristic, lo, hi, m) for lo, hi in zip(zeros_m, zeros_next))
    # J_{m+1}/J_m runs from -inf to +inf between consecutive zeros of J_m
    edges = np.concatenate([[0.0], zeros_m])
    roots = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        pad = 1e-9 * hi
        roots.append(_brentq(supported_characteristic, lo + pad, hi - pad, m))
    return tuple(roots)


def circular_char_roots(m: int, n_max: int, boundary: str) -> np.ndarray:
    """
    First n_max positive roots gamma_(m,0..n_max-1) of the characteristic equation.

    Args:
        m: Circumferential wave number (>= 0)
        n_max: Number of roots
        boundary: "clamped" or "simply-supported"

    Returns:
        (n_max,) strictly increasing roots

    Raises:
        AnalyticalError: for invalid indices or failed bracketing
    """
    if int(m) != m or m < 0:
        raise AnalyticalError(f"circumferential index must be a non-negative integer, got {m}")
    if int(n_max) != n_max or n_max < 1:
        raise AnalyticalError(f"n_max must be a positive integer, got {n_max}")
    if boundary not in BOUNDARIES:
        raise AnalyticalError(f"unknown boundary '{boundary}'")
    return np.array(_roots(int(m), int(n_max), boundary))


def circular_frequency(gamma: float, spec: PlateSpec) -> float:
    """omega_(m,n) = gamma^2 / a^2 sqrt(c / rho)."""
    if not gamma > 0.0:
        raise AnalyticalError(f"root must be positive, got {gamma}")
    return gamma ** 2 / spec.a ** 2 * spec.wave_speed


def circular_mode_frequency(m: int, n: int, spec: PlateSpec) -> float:
    """omega of the (m, n) circular mode, n counting roots from 0."""
    _check_indices(m, n, 0)
    if spec.shape != "circle":
        raise AnalyticalError("circular_mode_frequency needs a circular plate")
    return circular_frequency(circular_char_roots(m, n + 1, spec.boundary)[n], spec)


# ==========================================
# Mode shapes
# ==========================================
def radial_shape(r, m: int, gamma: float, radius: float):
    """R_(m,n)(r) = I_m(gamma) J_m(gamma r / a) - J_m(gamma) I_m(gamma r / a)."""
    x = gamma * np.asarray(r, dtype=float) / radius
    return special.iv(m, gamma) * special.jv(m, x) - special.jv(m, gamma) * special.iv(m, x)


def radial_shape_slope(r, m: int, gamma: float, radius: float):
    """dR/dr of radial_shape."""
    x = gamma * np.asarray(r, dtype=float) / radius
    return gamma / radius * (special.iv(m, gamma) * special.jvp(m, x) - special.jv(m, gamma) * special.ivp(m, x))


def mode_shape_samples(spec: PlateSpec, m: int, n: int, points: np.ndarray, phase: str = "cos") -> np.ndarray:
    """
    Analytic transverse mode shape at in-plane points.

    Rectangles use sin(m pi x / a) sin(n pi y / b) on [0, a] x [0, b]; circles
    use R_(m,n)(r) cos(m phi) (or sin) about the origin.

    Args:
        spec: Plate geometry and constants
        m, n: Mode indices (rectangle from 1, circle from 0)
        points: (npt, 2) or (npt, 3) coordinates
        phase: "cos" or "sin" angular dependence for circles

    Returns:
        (npt,) samples
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    x, y = points[:, 0], points[:, 1]
    if spec.shape == "rectangle":
        _check_indices(m, n, 1)
        return np.sin(m * math.pi * x / spec.a) * np.sin(n * math.pi * y / spec.b)
    _check_indices(m, n, 0)
    if phase not in ("cos", "sin"):
        raise AnalyticalError(f"phase must be 'cos' or 'sin', got '{phase}'")
    gamma = circular_char_roots(m, n + 1, spec.boundary)[n]
    r = np.hypot(x, y)
    phi = np.arctan2(y, x)
    angular = np.cos(m * phi) if phase == "cos" else np.sin(m * phi)
    return radial_shape(r, m, gamma, spec.a) * angular


# ==========================================
# Tables
# ==========================================
def frequency_table(spec: PlateSpec, modes: int = 9) -> List[Dict[str, float]]:
    """
    The lowest modes of a plate in ascending frequency.

    Degenerate pairs keep (m, n) order. A mode with an index at or beyond
    `modes` always has `modes` lower modes below it, so the search grid
    m, n < modes (m, n <= modes for rectangles) is complete.

    Args:
        spec: Plate geometry and constants
        modes: Number of rows

    Returns:
        Rows with keys m, n, gamma (circles only), omega, f_THz
    """
    if int(modes) != modes or modes < 1:
        raise AnalyticalError(f"modes must be a positive integer, got {modes}")
    modes = int(modes)
    rows = []
    if spec.shape == "rectangle":
        for m in range(1, modes + 1):
            for n in range(1, modes + 1):
                omega = rect_ss_frequency(m, n, spec)
                rows.append({"m": m, "n": n, "gamma": float("nan"), "omega": omega, "f_THz": to_thz(omega)})
    else:
        for m in range(0, modes):
            for n, gamma in enumerate(circular_char_roots(m, modes, spec.boundary)):
                omega = circular_frequency(gamma, spec)
                rows.append({"m": m, "n": n, "gamma": float(gamma), "omega": omega, "f_THz": to_thz(omega)})
    rows.sort(key=lambda row: (round(row["omega"], 12), row["m"], row["n"]))
    logger.debug("frequency table for %s %s: %d of %d candidates", spec.boundary, spec.shape, modes, len(rows))
    return rows[:modes]
