"""
Graphene Material Module.
Hyperelastic membrane energy in logarithmic strain invariants, Canham bending,
Kirchhoff stress and moment, and the fourth-order tangent tensors.

The membrane energy is evaluated from the right Cauchy-Green tensor in the
reference lattice frame (C_xx, C_yy, C_xy). With C_hat = C / J,
s11 = (C_hat_xx - C_hat_yy) / 2, s12 = C_hat_xy and q^2 = s11^2 + s12^2:

    J1 = ln J,  J2 = (asinh q)^2 / 4,  J3 = (asinh q / 2q)^3 (s11^3 - 3 s11 s12^2)

These agree with the (lambda1, lambda2, theta) definitions and stay analytic at
lambda1 = lambda2, where the stretch direction is undefined.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Dict, Tuple

import numpy as np
import sympy as sp

from ..errors import MaterialError

logger = logging.getLogger(__name__)

# Units: nm, nN, ps. Mass unit nN ps^2 / nm = 1e-24 kg.
MASS_UNIT_KG = 1e-24
CARBON_MASS_KG = 1.9944e-26
BOND_LENGTH_NM = 0.142
GRAPHENE_DENSITY = 0.76106

MEMBRANE_PRESETS: Dict[str, Dict[str, float]] = {
    "GGA": {
        "alpha_hat": 1.53,
        "epsilon": 93.84,
        "mu0": 172.18,
        "mu1": 27.03,
        "beta_hat": 5.16,
        "eta0": 94.65,
        "eta1": 4393.26,
    },
    "LDA": {
        "alpha_hat": 1.38,
        "epsilon": 116.43,
        "mu0": 164.17,
        "mu1": 17.31,
        "beta_hat": 6.22,
        "eta0": 86.9,
        "eta1": 3611.5,
    },
}

BENDING_PRESETS: Dict[str, float] = {
    "FGBP": 0.133,
    "SGBP": 0.225,
    "QM": 0.238,
}

# asinh(q)/q is expanded in t = q^2 below this value
SERIES_LIMIT = 0.25
SERIES_TERMS = 30


# ===== Parameters =====
@dataclass(frozen=True)
class MaterialParams:
    """Graphene constants in internal units (N/m = nN/nm, nN nm, 1e-24 kg / nm^2)."""

    alpha_hat: float
    epsilon: float
    mu0: float
    mu1: float
    beta_hat: float
    eta0: float
    eta1: float
    c_bend: float
    rho0: float = GRAPHENE_DENSITY
    membrane_tag: str = "custom"
    bending_tag: str = "custom"

    def __post_init__(self):
        positive = ("alpha_hat", "epsilon", "mu0", "mu1", "beta_hat", "eta0", "eta1", "c_bend", "rho0")
        for name in positive:
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0.0):
                raise MaterialError(f"{name} must be positive, got {value}")
        if self.mu0 < self.mu1:
            raise MaterialError(f"mu0 ({self.mu0}) must not be smaller than mu1 ({self.mu1})")

    @classmethod
    def from_presets(cls, membrane: str = "GGA", bending: str = "QM", rho0: float = GRAPHENE_DENSITY) -> "MaterialParams":
        """
        Build parameters from named presets.

        Args:
            membrane: "GGA" or "LDA"
            bending: "FGBP", "SGBP" or "QM"
            rho0: Reference areal density

        Returns:
            MaterialParams
        """
        membrane_key = membrane.upper()
        bending_key = bending.upper()
        if membrane_key not in MEMBRANE_PRESETS:
            raise MaterialError(f"unknown membrane preset '{membrane}' (choose from {', '.join(MEMBRANE_PRESETS)})")
        if bending_key not in BENDING_PRESETS:
            raise MaterialError(f"unknown bending preset '{bending}' (choose from {', '.join(BENDING_PRESETS)})")
        return cls(
            c_bend=BENDING_PRESETS[bending_key],
            rho0=rho0,
            membrane_tag=membrane_key,
            bending_tag=bending_key,
            **MEMBRANE_PRESETS[membrane_key],
        )

    def with_bending(self, c_bend: float) -> "MaterialParams":
        return replace(self, c_bend=c_bend, bending_tag="custom")

    def mu(self, ea):
        """Strain-dependent shear modulus mu(eps_a) = mu0 - mu1 exp(beta_hat eps_a)."""
        return self.mu0 - self.mu1 * np.exp(self.beta_hat * np.asarray(ea, dtype=float))

    def eta(self, ea):
        """Strain-dependent anisotropy modulus eta(eps_a) = eta0 - eta1 eps_a^2."""
        return self.eta0 - self.eta1 * np.asarray(ea, dtype=float) ** 2


# ===== Results =====
@dataclass(frozen=True)
class StressState:
    """Contravariant Kirchhoff stress and moment components, each (..., 2, 2)."""

    tau_ab: np.ndarray
    M0_ab: np.ndarray


@dataclass(frozen=True)
class TangentTensors:
    """Fourth-order tangents c, d, e, f, each (..., 2, 2, 2, 2)."""

    c_abgd: np.ndarray
    d_abgd: np.ndarray
    e_abgd: np.ndarray
    f_abgd: np.ndarray
    shear_stiffness: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class StressResultants:
    """Cauchy-type resultants used for post-processing."""

    sigma_ab: np.ndarray
    M_ab: np.ndarray
    N_ab: np.ndarray
    N_mixed: np.ndarray


# ===== Energy densities =====
def membrane_energy(J1, J2, J3, params: MaterialParams):
    """
    Membrane strain energy per reference area.

    Args:
        J1: ln J (area strain eps_a)
        J2: squared log stretch ratio
        J3: anisotropic cubic invariant
        params: Material parameters

    Returns:
        W_m = W_dil + 2 mu(J1) J2 + eta(J1) J3  (N/m)
    """
    J1 = np.asarray(J1, dtype=float)
    dil, _, _ = _dilatation_terms(J1, params)
    return dil + 2.0 * params.mu(J1) * np.asarray(J2) + params.eta(J1) * np.asarray(J3)


def bending_energy(kappa1, kappa2, J, params: MaterialParams):
    """Canham bending energy per reference area, J (c/2)(kappa1^2 + kappa2^2)."""
    kappa1 = np.asarray(kappa1, dtype=float)
    kappa2 = np.asarray(kappa2, dtype=float)
    return np.asarray(J) * 0.5 * params.c_bend * (kappa1 ** 2 + kappa2 ** 2)


def _dilatation_terms(ea, params: MaterialParams):
    x = params.alpha_hat * ea
    decay = np.exp(-x)
    scale = params.epsilon * params.alpha_hat ** 2
    W = params.epsilon * (1.0 - (1.0 + x) * decay)
    return W, scale * ea * decay, scale * decay * (1.0 - x)


def _shear_terms(ea, params: MaterialParams):
    growth = params.mu1 * np.exp(params.beta_hat * ea)
    return params.mu0 - growth, -params.beta_hat * growth, -params.beta_hat ** 2 * growth


def _anisotropy_terms(ea, params: MaterialParams):
    return params.eta0 - params.eta1 * ea ** 2, -2.0 * params.eta1 * ea, np.full_like(ea, -2.0 * params.eta1)


@lru_cache(maxsize=None)
def _series_coefficients() -> np.ndarray:
    n = np.arange(SERIES_TERMS)
    return np.array([(-1) ** k * math.comb(2 * k, k) / (4 ** k * (2 * k + 1)) for k in n], dtype=float)


def _asinh_ratio(t):
    """A(t) = asinh(q)/q with q = sqrt(t), and its first two t-derivatives."""
    t = np.asarray(t, dtype=float)
    coeffs = _series_coefficients()
    ts = np.minimum(t, SERIES_LIMIT)
    A_s = np.polynomial.polynomial.polyval(ts, coeffs)
    A1_s = np.polynomial.polynomial.polyval(ts, np.polynomial.polynomial.polyder(coeffs))
    A2_s = np.polynomial.polynomial.polyval(ts, np.polynomial.polynomial.polyder(coeffs, 2))

    tc = np.maximum(t, SERIES_LIMIT)
    q = np.sqrt(tc)
    s = np.arcsinh(q)
    r = np.sqrt(1.0 + tc)
    A_c = s / q
    A1_c = (q / r - s) / (2.0 * q ** 3)
    A2_c = (3.0 * s - 3.0 * q / r - q ** 3 / r ** 3) / (4.0 * q ** 5)

    small = t < SERIES_LIMIT
    return np.where(small, A_s, A_c), np.where(small, A1_s, A1_c), np.where(small, A2_s, A2_c)


def _deviatoric_terms(s11, s12):
    """J2, J3 and their gradients / Hessians with respect to (s11, s12)."""
    t = s11 ** 2 + s12 ** 2
    A, A1, A2 = _asinh_ratio(t)
    s = np.stack([s11, s12], axis=-1)
    ss = s[..., :, None] * s[..., None, :]
    eye = np.eye(2)

    G2 = 0.25 * t * A ** 2
    G2_t = 0.25 * (A ** 2 + 2.0 * t * A * A1)
    G2_tt = A * A1 + 0.5 * t * (A1 ** 2 + A * A2)
    dG2 = 2.0 * G2_t[..., None] * s
    ddG2 = 4.0 * G2_tt[..., None, None] * ss + 2.0 * G2_t[..., None, None] * eye

    B = A ** 3
    B_t = 3.0 * A ** 2 * A1
    B_tt = 6.0 * A * A1 ** 2 + 3.0 * A ** 2 * A2
    P3 = s11 ** 3 - 3.0 * s11 * s12 ** 2
    dP3 = np.stack([3.0 * s11 ** 2 - 3.0 * s12 ** 2, -6.0 * s11 * s12], axis=-1)
    ddP3 = np.empty(s.shape + (2,))
    ddP3[..., 0, 0] = 6.0 * s11
    ddP3[..., 0, 1] = -6.0 * s12
    ddP3[..., 1, 0] = -6.0 * s12
    ddP3[..., 1, 1] = -6.0 * s11

    G3 = B * P3 / 8.0
    dG3 = (2.0 * (B_t * P3)[..., None] * s + B[..., None] * dP3) / 8.0
    cross = s[..., :, None] * dP3[..., None, :]
    ddG3 = (
        4.0 * (B_tt * P3)[..., None, None] * ss
        + 2.0 * (B_t * P3)[..., None, None] * eye
        + 2.0 * B_t[..., None, None] * (cross + np.swapaxes(cross, -1, -2))
        + B[..., None, None] * ddP3
    ) / 8.0
    return G2, dG2, ddG2, G3, dG3, ddG3


# ===== Symbolic kinematic maps =====
def _lambdify_grid(symbols, exprs):
    """Lambdify a nested list of expressions entry by entry into a broadcasting evaluator."""
    grid = np.array(exprs, dtype=object)
    funcs = [sp.lambdify(symbols, expr, modules="numpy") for expr in grid.ravel()]
    shape = grid.shape

    def evaluate(*args):
        args = [np.asarray(a, dtype=float) for a in args]
        batch = np.broadcast(*args).shape
        out = np.empty(batch + shape)
        flat = out.reshape(batch + (-1,))
        for k, func in enumerate(funcs):
            flat[..., k] = func(*args)
        return out

    return evaluate


@lru_cache(maxsize=None)
def _lattice_map():
    """(ln J, s11, s12) as functions of (C_xx, C_yy, C_xy): gradient and Hessians."""
    cxx, cyy, cxy = sp.symbols("cxx cyy cxy", real=True)
    det = cxx * cyy - cxy ** 2
    J = sp.sqrt(det)
    y = [sp.log(det) / 2, (cxx - cyy) / (2 * J), cxy / J]
    c = [cxx, cyy, cxy]
    jac = [[sp.diff(yk, ci) for ci in c] for yk in y]
    hess = [[[sp.diff(yk, ci, cj) for cj in c] for ci in c] for yk in y]
    logger.debug("lattice invariant map derived symbolically")
    return _lambdify_grid(c, y), _lambdify_grid(c, jac), _lambdify_grid(c, hess)


@lru_cache(maxsize=None)
def _bending_map():
    """
    Bending energy J (c/2) tr((a^-1 b)^2) with gradient and Hessian in (a11, a22, a12, b11, b22, b12).

    The curvature is absolute: a curved reference (the tube) carries bending
    energy and a bending prestress at zero displacement.
    """
    a11, a22, a12, b11, b22, b12 = sp.symbols("a11 a22 a12 b11 b22 b12", real=True)
    det_ref, c_bend = sp.symbols("det_ref c_bend", real=True)
    det_a = a11 * a22 - a12 ** 2
    a_inv = sp.Matrix([[a22, -a12], [-a12, a11]]) / det_a
    mixed = a_inv * sp.Matrix([[b11, b12], [b12, b22]])
    W = sp.sqrt(det_a / det_ref) * c_bend / 2 * (mixed * mixed).trace()

    z = [a11, a22, a12, b11, b22, b12]
    grad = [sp.diff(W, zi) for zi in z]
    hess = [[sp.diff(gi, zj) for zj in z] for gi in grad]
    args = z + [det_ref, c_bend]
    logger.debug("bending energy derivatives derived symbolically")
    return _lambdify_grid(args, W), _lambdify_grid(args, grad), _lambdify_grid(args, hess)


def _bending_args(state, params: MaterialParams):
    a = state.a_ab
    b = state.b_ab
    return (
        a[..., 0, 0], a[..., 1, 1], a[..., 0, 1],
        b[..., 0, 0], b[..., 1, 1], b[..., 0, 1],
        state.reference.det, params.c_bend,
    )


# ===== Invariants from the lattice-frame Cauchy-Green tensor =====
def lattice_coordinates(cauchy_green) -> np.ndarray:
    """Map (C_xx, C_yy, C_xy) to (ln J, s11, s12), shape (..., 3)."""
    values, _, _ = _lattice_map()
    cauchy_green = np.asarray(cauchy_green, dtype=float)
    return values(cauchy_green[..., 0], cauchy_green[..., 1], cauchy_green[..., 2])


def lattice_invariants(cauchy_green) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Logarithmic invariants evaluated directly from the lattice-frame Cauchy-Green components.

    Args:
        cauchy_green: (..., 3) array of (C_xx, C_yy, C_xy)

    Returns:
        Tuple of (J1, J2, J3)
    """
    y = lattice_coordinates(cauchy_green)
    G2, _, _, G3, _, _ = _deviatoric_terms(y[..., 1], y[..., 2])
    return y[..., 0], G2, G3


# ===== Energy derivatives =====
def _membrane_derivatives(state, params: MaterialParams):
    """Membrane energy, gradient and Hessian with respect to (a11, a22, a12)."""
    _, jac_fn, hess_fn = _lattice_map()
    C = state.cauchy_green
    y = lattice_coordinates(C)
    ea, s11, s12 = y[..., 0], y[..., 1], y[..., 2]

    dil, ddil, dddil = _dilatation_terms(ea, params)
    mu, dmu, ddmu = _shear_terms(ea, params)
    eta, deta, ddeta = _anisotropy_terms(ea, params)
    G2, dG2, ddG2, G3, dG3, ddG3 = _deviatoric_terms(s11, s12)

    W = dil + 2.0 * mu * G2 + eta * G3
    g_y = np.empty(y.shape)
    g_y[..., 0] = ddil + 2.0 * dmu * G2 + deta * G3
    g_y[..., 1:] = 2.0 * mu[..., None] * dG2 + eta[..., None] * dG3

    H_y = np.empty(y.shape + (3,))
    H_y[..., 0, 0] = dddil + 2.0 * ddmu * G2 + ddeta * G3
    H_y[..., 0, 1:] = 2.0 * dmu[..., None] * dG2 + deta[..., None] * dG3
    H_y[..., 1:, 0] = H_y[..., 0, 1:]
    H_y[..., 1:, 1:] = 2.0 * mu[..., None, None] * ddG2 + eta[..., None, None] * ddG3

    jac = jac_fn(C[..., 0], C[..., 1], C[..., 2])
    hess = hess_fn(C[..., 0], C[..., 1], C[..., 2])
    g_c = np.einsum("...k,...ki->...i", g_y, jac)
    H_c = np.einsum("...ki,...kl,...lj->...ij", jac, H_y, jac) + np.einsum("...k,...kij->...ij", g_y, hess)

    T = state.metric_map
    g_a = np.einsum("...i,...ij->...j", g_c, T)
    H_a = np.einsum("...ki,...kl,...lj->...ij", T, H_c, T)
    return W, g_a, H_a, 2.0 * mu[..., None, None] * ddG2 + eta[..., None, None] * ddG3


def energy_derivatives(state, params: MaterialParams):
    """
    Total energy density with gradient and Hessian in Voigt form.

    The Voigt variables are z = (a11, a22, a12, b11, b22, b12), with the shear
    components counted once.

    Args:
        state: SurfacePointState at the evaluation points
        params: Material parameters

    Returns:
        Tuple of (W, grad (..., 6), hess (..., 6, 6), deviatoric Hessian (..., 2, 2))
    """
    W_m, g_m, H_m, H_dev = _membrane_derivatives(state, params)
    energy_fn, grad_fn, hess_fn = _bending_map()
    args = _bending_args(state, params)
    W_b = energy_fn(*args)
    grad = grad_fn(*args)
    hess = hess_fn(*args)
    grad[..., :3] += g_m
    hess[..., :3, :3] += H_m
    return W_m + W_b, grad, hess, H_dev


def strain_energy(state, params: MaterialParams) -> np.ndarray:
    """Membrane plus bending energy per reference area at each evaluation point."""
    J1, J2, J3 = lattice_invariants(state.cauchy_green)
    energy_fn, _, _ = _bending_map()
    return membrane_energy(J1, J2, J3, params) + energy_fn(*_bending_args(state, params))


# ===== Voigt to tensor components =====
_VOIGT_INDEX = np.array([[0, 2], [2, 1]])
_SHEAR_FACTOR = np.array([[1.0, 0.5], [0.5, 1.0]])


def _vector_to_tensor(g):
    return g[..., _VOIGT_INDEX] * _SHEAR_FACTOR


def _matrix_to_tensor(H):
    rows = _VOIGT_INDEX[:, :, None, None]
    cols = _VOIGT_INDEX[None, None, :, :]
    scale = _SHEAR_FACTOR[:, :, None, None] * _SHEAR_FACTOR[None, None, :, :]
    return H[..., rows, cols] * scale


def material_response(state, params: MaterialParams) -> Tuple[StressState, TangentTensors]:
    """
    Stress, moment and tangent tensors from one evaluation of the energy derivatives.

    Args:
        state: SurfacePointState
        params: Material parameters

    Returns:
        Tuple of (StressState, TangentTensors)
    """
    _, grad, hess, H_dev = energy_derivatives(state, params)
    stress = StressState(
        tau_ab=2.0 * _vector_to_tensor(grad[..., :3]),
        M0_ab=_vector_to_tensor(grad[..., 3:]),
    )
    tangents = TangentTensors(
        c_abgd=4.0 * _matrix_to_tensor(hess[..., :3, :3]),
        d_abgd=2.0 * _matrix_to_tensor(hess[..., :3, 3:]),
        e_abgd=2.0 * _matrix_to_tensor(hess[..., 3:, :3]),
        f_abgd=_matrix_to_tensor(hess[..., 3:, 3:]),
        shear_stiffness=np.linalg.eigvalsh(H_dev)[..., 0],
    )
    return stress, tangents


def stress_and_moment(state, params: MaterialParams) -> StressState:
    """
    Kirchhoff stress tau^{ab} = 2 dW/da_ab and moment M0^{ab} = dW/db_ab.

    Args:
        state: SurfacePointState
        params: Material parameters

    Returns:
        StressState with symmetric (..., 2, 2) components
    """
    return material_response(state, params)[0]


def tangent_tensors(state, params: MaterialParams) -> TangentTensors:
    """
    Tangents c = 2 dtau/da, d = 2 dtau/db, e = 2 dM0/da, f = dM0/db.

    shear_stiffness holds the smallest eigenvalue of the deviatoric energy
    Hessian; it equals mu(eps_a) under pure dilatation and vanishes where
    the lattice loses shear stability.
    """
    return material_response(state, params)[1]


def stress_resultants(state, params: MaterialParams) -> StressResultants:
    """
    Post-processing resultants.

    sigma = tau / J, M = M0 / J, N^{ab} = sigma^{ab} + b^a_g M^{gb},
    and the mixed in-plane components N^a_b = N^{ag} a_gb.

    Args:
        state: SurfacePointState
        params: Material parameters

    Returns:
        StressResultants
    """
    stress = stress_and_moment(state, params)
    J = state.J[..., None, None]
    sigma = stress.tau_ab / J
    moment = stress.M0_ab / J
    b_mixed = np.einsum("...ad,...dg->...ag", state.current.metric_inv, state.b_ab)
    N = sigma + np.einsum("...ag,...gb->...ab", b_mixed, moment)
    N_mixed = np.einsum("...ag,...gb->...ab", N, state.a_ab)
    return StressResultants(sigma_ab=sigma, M_ab=moment, N_ab=N, N_mixed=N_mixed)


# ===== Derived constants =====
def vanishing_shear_strain(params: MaterialParams) -> Tuple[float, float]:
    """
    Area strain at which mu(eps_a) = 0.

    Args:
        params: Material parameters

    Returns:
        Tuple of (eps_a*, J*) with eps_a* = ln(mu0/mu1)/beta_hat and J* = exp(eps_a*)

    Raises:
        MaterialError: if mu1 is not positive
    """
    if params.mu1 <= 0.0:
        raise MaterialError(f"mu1 must be positive to reach vanishing shear, got {params.mu1}")
    ea = math.log(params.mu0 / params.mu1) / params.beta_hat
    return ea, math.exp(ea)


def density_from_lattice(bond_length_nm: float = BOND_LENGTH_NM, atom_mass_kg: float = CARBON_MASS_KG) -> float:
    """
    Areal density of a honeycomb lattice: two atoms per hexagon of area (3 sqrt(3) / 2) a^2.

    Args:
        bond_length_nm: Carbon-carbon bond length
        atom_mass_kg: Atomic mass

    Returns:
        Density in internal mass units per nm^2
    """
    if bond_length_nm <= 0.0 or atom_mass_kg <= 0.0:
        raise MaterialError("bond length and atom mass must be positive")
    cell_area = 1.5 * math.sqrt(3.0) * bond_length_nm ** 2
    return 2.0 * (atom_mass_kg / MASS_UNIT_KG) / cell_area


def graphene_density() -> float:
    """Reference areal density of graphene, 0.76106e-6 kg/m^2 in internal units."""
    return GRAPHENE_DENSITY
