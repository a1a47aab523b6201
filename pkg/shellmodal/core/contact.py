"""
Substrate Adhesion Module.
Lennard-Jones half-space potential, substrate height profiles, and the
adhesion force and stiffness of a shell resting above a substrate.

The contact energy is E_c = int Psi(r) da over the current surface
(da = J dA), with the vertical gap r = z - h(x, y) to the substrate profile.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from scipy import sparse

from ..errors import ContactError, PenetrationError
from .assembly import _node_blocks, chunk_basis, iter_chunks, sum_gauss, surface_pattern
from .discretization import ShellModel
from .geometry import SurfaceFrame

logger = logging.getLogger(__name__)

DEFAULT_H0 = 0.34
PENETRATION_LIMIT = 0.05
# fillet points closer than this fraction of R2 to the cavity wall are treated as inside the cavity
WALL_CLEARANCE = 1e-3


# ==========================================
# Substrate profiles
# ==========================================
@dataclass(frozen=True)
class SubstrateProfile:
    """
    Height h(x, y) of the substrate surface.

    kind "flat": plane z = z_s.
    kind "cavity": plane z = z_s with a circular hole of radius R1 around
    center, the rim rounded by a fillet of radius R2 (no interaction inside
    the hole).
    """

    kind: str = "flat"
    z_s: float = -DEFAULT_H0
    R1: float = 0.0
    R2: float = 0.0
    center: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.kind not in ("flat", "cavity"):
            raise ContactError(f"unknown substrate profile '{self.kind}'")
        if self.kind == "cavity" and not (self.R1 > 0.0 and self.R2 > 0.0):
            raise ContactError("cavity profile needs positive radii R1 and R2")

    def evaluate(self, x: np.ndarray):
        """
        Height, gradient and Hessian of the profile at in-plane positions.

        Args:
            x: (..., 3) points (only x and y are used)

        Returns:
            Tuple of (active mask, h, grad h (..., 2), hess h (..., 2, 2))
        """
        shape = x.shape[:-1]
        h = np.full(shape, self.z_s)
        grad = np.zeros(shape + (2,))
        hess = np.zeros(shape + (2, 2))
        active = np.ones(shape, dtype=bool)
        if self.kind == "flat":
            return active, h, grad, hess

        dx = x[..., 0] - self.center[0]
        dy = x[..., 1] - self.center[1]
        rho = np.sqrt(dx ** 2 + dy ** 2)
        active = rho >= self.R1 + WALL_CLEARANCE * self.R2
        fillet = active & (rho < self.R1 + self.R2)
        if np.any(fillet):
            # rim: quarter circle of radius R2 centered at (R1 + R2, z_s - R2)
            s = np.where(fillet, self.R1 + self.R2 - rho, 0.0)
            root = np.sqrt(np.where(fillet, self.R2 ** 2 - s ** 2, 1.0))
            dh = s / root                                   # dh/drho
            d2h = -(self.R2 ** 2) / root ** 3               # d2h/drho2
            h = np.where(fillet, self.z_s - self.R2 + root, h)
            safe_rho = np.where(fillet, rho, 1.0)
            e = np.stack([dx, dy], axis=-1) / safe_rho[..., None]
            grad = np.where(fillet[..., None], dh[..., None] * e, grad)
            ee = e[..., :, None] * e[..., None, :]
            radial = d2h[..., None, None] * ee + (dh / safe_rho)[..., None, None] * (np.eye(2) - ee)
            hess = np.where(fillet[..., None, None], radial, hess)
        return active, h, grad, hess

    def height(self, x: np.ndarray) -> np.ndarray:
        return self.evaluate(x)[1]


def cavity_profile(R1: float, R2: float, z_s: float = -DEFAULT_H0, center: Tuple[float, float] = (0.0, 0.0)) -> SubstrateProfile:
    """Annular substrate around a circular cavity of radius R1 with rim fillet R2."""
    return SubstrateProfile(kind="cavity", z_s=z_s, R1=R1, R2=R2, center=center)


@dataclass(frozen=True)
class AdhesionParams:
    """Half-space adhesion: energy Gamma (N/m), equilibrium distance h0 (nm) and the substrate."""

    Gamma: float
    h0: float = DEFAULT_H0
    profile: SubstrateProfile = field(default_factory=SubstrateProfile)

    def __post_init__(self):
        if not self.Gamma >= 0.0:
            raise ContactError(f"adhesion energy Gamma must be non-negative, got {self.Gamma}")
        if not self.h0 > 0.0:
            raise ContactError(f"equilibrium distance h0 must be positive, got {self.h0}")

    def with_gamma(self, Gamma: float) -> "AdhesionParams":
        return AdhesionParams(Gamma=Gamma, h0=self.h0, profile=self.profile)


# ==========================================
# Half-space potential
# ==========================================
def _check_gap(r):
    r = np.asarray(r, dtype=float)
    if np.any(~(r > 0.0)):
        raise PenetrationError(f"non-positive substrate gap (min {float(np.min(r)):.4g} nm)")
    return r


def half_space_potential(r, params: AdhesionParams):
    """
    Psi(r) = -Gamma [1.5 (h0/r)^3 - 0.5 (h0/r)^9].

    Args:
        r: Gap to the substrate (nm)
        params: Adhesion parameters

    Returns:
        Energy per unit area (N/m)

    Raises:
        PenetrationError: if r <= 0
    """
    r = _check_gap(r)
    s3 = (params.h0 / r) ** 3
    return -params.Gamma * (1.5 * s3 - 0.5 * s3 ** 3)


def half_space_derivatives(r, params: AdhesionParams):
    """Psi, dPsi/dr and d2Psi/dr2 at the gap r."""
    r = _check_gap(r)
    s3 = (params.h0 / r) ** 3
    s9 = s3 ** 3
    psi = -params.Gamma * (1.5 * s3 - 0.5 * s9)
    dpsi = 4.5 * params.Gamma * (s3 - s9) / r
    d2psi = params.Gamma * (45.0 * s9 - 18.0 * s3) / r ** 2
    return psi, dpsi, d2psi


def inflection_gap(params: AdhesionParams) -> float:
    """Gap beyond which the potential is concave: h0 (5/2)^(1/6)."""
    return params.h0 * (2.5 ** (1.0 / 6.0))


# ==========================================
# Force and stiffness
# ==========================================
def _contact_points(model: ShellModel, u: np.ndarray, elements: slice, points: slice, params: AdhesionParams):
    quad = model.quadrature
    basis = chunk_basis(quad, points)
    conn = np.repeat(quad.conn[elements], quad.n_gauss, axis=0)
    ref = model.ref_points[conn]
    cur = ref + u.reshape(-1, 3)[conn]
    reference = SurfaceFrame.from_points(ref, basis, label="reference")
    current = SurfaceFrame.from_points(cur, basis, label="current")
    active, h, grad_h, hess_h = params.profile.evaluate(current.x)
    gap = current.x[..., 2] - h
    if np.any(active):
        limit = PENETRATION_LIMIT * params.h0
        closest = float(np.min(gap[active]))
        if closest <= limit:
            raise PenetrationError(
                f"substrate gap {closest:.4g} nm below validity limit {limit:.4g} nm; reduce the load step"
            )
    gap = np.where(active, gap, 1.0)
    J = np.sqrt(current.det / reference.det)
    dA = quad.weight[points] * np.sqrt(reference.det)
    return basis, current, active, gap, grad_h, hess_h, J, dA


def adhesion_energy(model: ShellModel, u: np.ndarray, params: AdhesionParams) -> float:
    """Total adhesion energy int Psi(r) da."""
    if params.Gamma == 0.0:
        return 0.0
    u = np.asarray(u, dtype=float)
    total = 0.0
    for elements, points in iter_chunks(model.quadrature):
        _, _, active, gap, _, _, J, dA = _contact_points(model, u, elements, points, params)
        psi = np.where(active, half_space_potential(gap, params), 0.0)
        total += float(np.sum(psi * J * dA))
    return total


def contact_force_and_stiffness(model: ShellModel, u: np.ndarray, params: AdhesionParams) -> Tuple[np.ndarray, sparse.csr_matrix]:
    """
    Gradient and Hessian of the adhesion energy.

    With g = (-h_x, -h_y, 1) the gap gradient and G its derivative:
        f_I = int [Psi' g N_I + Psi a^a N_{I,a}] J dA
        K   = int [Psi'' g g N N + Psi' (g x a^b N_{,b} + sym) + Psi' G N N
                   + Psi (a^a N_{,a} x a^b N_{,b} - a^e N_{,a} x a^a N_{,e} + a^{ad} N_{,a} N_{,d} n x n)] J dA

    Args:
        model: Shell model
        u: Full displacement vector
        params: Adhesion parameters

    Returns:
        Tuple of (f_c (n_dofs,), K_c CSR)

    Raises:
        PenetrationError: if any gap falls below 0.05 h0
    """
    n_dofs = model.n_dofs
    if params.Gamma == 0.0:
        return np.zeros(n_dofs), sparse.csr_matrix((n_dofs, n_dofs))

    u = np.asarray(u, dtype=float)
    quad = model.quadrature
    nen = model.patch.nen
    f_blocks = np.zeros((quad.n_elements, 3 * nen))
    k_blocks = np.zeros((quad.n_elements, 3 * nen, 3 * nen))

    for elements, points in iter_chunks(quad):
        basis, current, active, gap, grad_h, hess_h, J, dA = _contact_points(model, u, elements, points, params)
        psi, dpsi, d2psi = half_space_derivatives(gap, params)
        mask = active.astype(float)
        weight = dA * J * mask
        q = len(dA)
        N = basis.N
        dN = basis.dN

        g = np.concatenate([-grad_h, np.ones(grad_h.shape[:-1] + (1,))], axis=-1)
        G = np.zeros((q, 3, 3))
        G[:, :2, :2] = -hess_h
        a_con = current.a_con
        n = current.normal

        gN = N[:, :, None] * g[:, None, :]                           # (q, I, i)
        aN = np.einsum("qaI,qai->qIi", dN, a_con)                     # a^a N_{I,a}
        f_q = dpsi[:, None, None] * gN + psi[:, None, None] * aN

        def outer(A, B):
            return np.einsum("qIi,qJj->qIiJj", A, B).reshape(q, 3 * nen, 3 * nen)

        mixed = np.einsum("qaI,qei,qaj,qeJ->qIiJj", dN, a_con, a_con, dN).reshape(q, 3 * nen, 3 * nen)
        normal = _node_blocks(
            np.einsum("qad,qaI,qdJ->qIJ", current.metric_inv, dN, dN), n[:, :, None] * n[:, None, :]
        )
        cross = outer(gN, aN)
        k_q = (
            d2psi[:, None, None] * outer(gN, gN)
            + dpsi[:, None, None] * (cross + np.swapaxes(cross, 1, 2))
            + dpsi[:, None, None] * _node_blocks(N[:, :, None] * N[:, None, :], G)
            + psi[:, None, None] * (outer(aN, aN) - mixed + normal)
        )
        f_blocks[elements] = sum_gauss((f_q * weight[:, None, None]).reshape(q, -1), quad.n_gauss)
        k_blocks[elements] = sum_gauss(k_q * weight[:, None, None], quad.n_gauss)

    pattern = surface_pattern(model)
    return pattern.vector(f_blocks), pattern.matrix(k_blocks)


def min_gap(model: ShellModel, u: np.ndarray, params: AdhesionParams) -> float:
    """Smallest gap over the quadrature points facing the substrate."""
    u = np.asarray(u, dtype=float)
    quad = model.quadrature
    conn = quad.point_conn
    cur = model.ref_points[conn] + u.reshape(-1, 3)[conn]
    x = np.einsum("qn,qni->qi", quad.basis.N, cur)
    active, h, _, _ = params.profile.evaluate(x)
    if not np.any(active):
        return math.inf
    return float(np.min((x[..., 2] - h)[active]))
