"""
Surface Kinematics Module.
Metrics, curvatures, Christoffel symbols, principal stretches and the
logarithmic strain invariants of a Kirchhoff-Love surface.

All functions are vectorized: arrays may carry any number of leading
dimensions (typically one per quadrature point), the trailing dimensions are
the geometric ones.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from ..errors import DegenerateMetricError, GeometryError

# Stretches closer than this (relative) are treated as equal; Y1 and theta are then undefined.
DEGENERATE_STRETCH_TOL = 1e-8
UNIT_VECTOR_TOL = 1e-9

ARMCHAIR_DEFAULT = np.array([1.0, 0.0, 0.0])


# ==========================================
# Surface frames
# ==========================================
@dataclass(frozen=True)
class SurfaceFrame:
    """Differential geometry of one configuration at a set of surface points."""

    x: np.ndarray            # (..., 3) position
    a_cov: np.ndarray        # (..., 2, 3) tangent vectors a_alpha
    a_cov_d: np.ndarray      # (..., 2, 2, 3) parametric derivatives a_{alpha,beta}
    metric: np.ndarray       # (..., 2, 2) a_{alpha beta}
    metric_inv: np.ndarray   # (..., 2, 2) a^{alpha beta}
    a_con: np.ndarray        # (..., 2, 3) dual vectors a^alpha
    det: np.ndarray          # (...,) det a_{alpha beta}
    normal: np.ndarray       # (..., 3)
    curvature: np.ndarray    # (..., 2, 2) b_{alpha beta}
    christoffel: np.ndarray  # (..., 2, 2, 2) Gamma^gamma_{alpha beta}, indexed [gamma, alpha, beta]

    @property
    def area_factor(self) -> np.ndarray:
        """Surface area per unit parametric area, sqrt(det a)."""
        return np.sqrt(self.det)

    @classmethod
    def from_points(cls, points: np.ndarray, basis: Sequence[np.ndarray], label: str = "current") -> "SurfaceFrame":
        """
        Evaluate the surface frame from control points and basis derivatives.

        Args:
            points: Control points, shape (..., nen, 3)
            basis: (N, dN, ddN) with shapes (..., nen), (..., 2, nen), (..., 2, 2, nen)
            label: Configuration name used in error messages

        Returns:
            SurfaceFrame
        """
        N, dN, ddN = basis
        x = np.einsum("...n,...ni->...i", N, points)
        a_cov = np.einsum("...an,...ni->...ai", dN, points)
        a_cov_d = np.einsum("...abn,...ni->...abi", ddN, points)
        metric = np.einsum("...ai,...bi->...ab", a_cov, a_cov)
        det = metric[..., 0, 0] * metric[..., 1, 1] - metric[..., 0, 1] ** 2

        if np.any(~(det > 0.0)):
            bad = int(np.count_nonzero(~(det > 0.0)))
            raise DegenerateMetricError(
                f"{label} metric is not positive definite at {bad} point(s); "
                "element inverted or load step too large"
            )

        metric_inv = np.empty_like(metric)
        metric_inv[..., 0, 0] = metric[..., 1, 1] / det
        metric_inv[..., 1, 1] = metric[..., 0, 0] / det
        metric_inv[..., 0, 1] = -metric[..., 0, 1] / det
        metric_inv[..., 1, 0] = metric_inv[..., 0, 1]

        a_con = np.einsum("...ab,...bi->...ai", metric_inv, a_cov)
        cross = np.cross(a_cov[..., 0, :], a_cov[..., 1, :])
        normal = cross / np.linalg.norm(cross, axis=-1)[..., None]
        curvature = np.einsum("...abi,...i->...ab", a_cov_d, normal)
        christoffel = np.einsum("...abi,...gi->...gab", a_cov_d, a_con)

        return cls(
            x=x,
            a_cov=a_cov,
            a_cov_d=a_cov_d,
            metric=metric,
            metric_inv=metric_inv,
            a_con=a_con,
            det=det,
            normal=normal,
            curvature=curvature,
            christoffel=christoffel,
        )


def lattice_frame(reference: SurfaceFrame, armchair: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Orthonormal lattice vectors (armchair x_hat, zigzag y_hat) in the reference tangent plane.

    The armchair direction is projected onto the tangent plane and normalized;
    y_hat = N x x_hat completes the right-handed frame.

    Args:
        reference: Reference surface frame
        armchair: Armchair direction, shape (3,) or (..., 3); global x if omitted

    Returns:
        Tuple of (x_hat, y_hat), each (..., 3)
    """
    if armchair is None:
        armchair = ARMCHAIR_DEFAULT
    normal = reference.normal
    armchair = np.broadcast_to(np.asarray(armchair, dtype=float), normal.shape)
    projected = armchair - np.einsum("...i,...i->...", armchair, normal)[..., None] * normal
    length = np.linalg.norm(projected, axis=-1)
    if np.any(length < 1e-12):
        raise GeometryError("armchair direction is normal to the reference surface")
    x_hat = projected / length[..., None]
    y_hat = np.cross(normal, x_hat)
    return x_hat, y_hat


# ==========================================
# Point state
# ==========================================
@dataclass(frozen=True)
class SurfacePointState:
    """Kinematic state at one or more quadrature points."""

    A_ab: np.ndarray          # reference metric
    a_ab: np.ndarray          # current metric
    B_ab: np.ndarray          # reference curvature
    b_ab: np.ndarray          # current curvature
    n_vec: np.ndarray         # current unit normal
    christoffel: np.ndarray   # current Gamma^gamma_{alpha beta}
    lambda1: np.ndarray
    lambda2: np.ndarray
    Y1: np.ndarray            # reference direction of maximum stretch
    J: np.ndarray
    kappa1: np.ndarray
    kappa2: np.ndarray
    theta: np.ndarray
    reference: SurfaceFrame
    current: SurfaceFrame
    x_hat: np.ndarray
    y_hat: np.ndarray
    cauchy_green: np.ndarray  # (..., 3) components (C_xx, C_yy, C_xy) in the lattice frame
    metric_map: np.ndarray    # (..., 3, 3) d(C_xx, C_yy, C_xy) / d(a_11, a_22, a_12)


def evaluate_kinematics(
    ref_points: np.ndarray,
    cur_points: np.ndarray,
    basis: Sequence[np.ndarray],
    armchair: Optional[np.ndarray] = None,
    reference: Optional[SurfaceFrame] = None,
) -> SurfacePointState:
    """
    Evaluate the full kinematic state at quadrature points.

    Args:
        ref_points: Reference control points (..., nen, 3)
        cur_points: Current control points (..., nen, 3)
        basis: (N, dN, ddN) shape function values and parametric derivatives
        armchair: Armchair direction (3,) or per point (..., 3)
        reference: Precomputed reference frame (skips re-evaluation)

    Returns:
        SurfacePointState

    Raises:
        DegenerateMetricError: if the reference or current metric is not positive definite
    """
    if reference is None:
        reference = SurfaceFrame.from_points(ref_points, basis, label="reference")
    current = SurfaceFrame.from_points(cur_points, basis, label="current")
    x_hat, y_hat = lattice_frame(reference, armchair)

    # Q[i, alpha] = e_i . A^alpha
    lattice = np.stack([x_hat, y_hat], axis=-2)
    Q = np.einsum("...ik,...ak->...ia", lattice, reference.a_con)
    C = np.einsum("...ia,...ab,...jb->...ij", Q, current.metric, Q)
    C = 0.5 * (C + np.swapaxes(C, -1, -2))

    metric_map = np.empty(Q.shape[:-2] + (3, 3))
    metric_map[..., 0, 0] = Q[..., 0, 0] ** 2
    metric_map[..., 0, 1] = Q[..., 0, 1] ** 2
    metric_map[..., 0, 2] = 2.0 * Q[..., 0, 0] * Q[..., 0, 1]
    metric_map[..., 1, 0] = Q[..., 1, 0] ** 2
    metric_map[..., 1, 1] = Q[..., 1, 1] ** 2
    metric_map[..., 1, 2] = 2.0 * Q[..., 1, 0] * Q[..., 1, 1]
    metric_map[..., 2, 0] = Q[..., 0, 0] * Q[..., 1, 0]
    metric_map[..., 2, 1] = Q[..., 0, 1] * Q[..., 1, 1]
    metric_map[..., 2, 2] = Q[..., 0, 0] * Q[..., 1, 1] + Q[..., 0, 1] * Q[..., 1, 0]

    eigvals, eigvecs = np.linalg.eigh(C)
    eigvals = np.clip(eigvals, np.finfo(float).tiny, None)
    lambda1 = np.sqrt(eigvals[..., 1])
    lambda2 = np.sqrt(eigvals[..., 0])
    J = np.sqrt(current.det / reference.det)

    v1 = eigvecs[..., :, 1]
    Y1 = v1[..., 0, None] * x_hat + v1[..., 1, None] * y_hat
    theta = np.arccos(np.clip(v1[..., 0], -1.0, 1.0))
    degenerate = (lambda1 - lambda2) < DEGENERATE_STRETCH_TOL * lambda1
    if np.any(degenerate):
        theta = np.where(degenerate, 0.0, theta)
        Y1 = np.where(degenerate[..., None], x_hat, Y1)

    mixed = np.einsum("...ag,...gb->...ab", current.metric_inv, current.curvature)
    mean = 0.5 * (mixed[..., 0, 0] + mixed[..., 1, 1])
    gauss = np.linalg.det(current.curvature) / current.det
    root = np.sqrt(np.clip(mean ** 2 - gauss, 0.0, None))

    return SurfacePointState(
        A_ab=reference.metric,
        a_ab=current.metric,
        B_ab=reference.curvature,
        b_ab=current.curvature,
        n_vec=current.normal,
        christoffel=current.christoffel,
        lambda1=lambda1,
        lambda2=lambda2,
        Y1=Y1,
        J=J,
        kappa1=mean + root,
        kappa2=mean - root,
        theta=theta,
        reference=reference,
        current=current,
        x_hat=x_hat,
        y_hat=y_hat,
        cauchy_green=np.stack([C[..., 0, 0], C[..., 1, 1], C[..., 0, 1]], axis=-1),
        metric_map=metric_map,
    )


# ==========================================
# Invariants
# ==========================================
def log_invariants(state: SurfacePointState) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Logarithmic strain invariants of the graphene lattice.

    J1 = ln J, J2 = (ln lambda)^2, J3 = (ln lambda)^3 cos(6 theta), lambda = sqrt(lambda1 / lambda2).

    Args:
        state: Kinematic state

    Returns:
        Tuple of (J1, J2, J3)
    """
    J1 = np.log(state.lambda1 * state.lambda2)
    log_ratio = 0.5 * np.log(state.lambda1 / state.lambda2)
    J2 = log_ratio ** 2
    J3 = log_ratio ** 3 * np.cos(6.0 * state.theta)
    return J1, J2, J3


def max_stretch_angle(Y1: np.ndarray, armchair: np.ndarray) -> np.ndarray:
    """
    Angle between the maximum-stretch direction and the armchair direction.

    Args:
        Y1: Unit direction of maximum stretch (..., 3)
        armchair: Unit armchair direction (..., 3)

    Returns:
        theta in [0, pi]

    Raises:
        GeometryError: if either input is not a unit vector
    """
    Y1 = np.asarray(Y1, dtype=float)
    armchair = np.asarray(armchair, dtype=float)
    for name, vec in (("Y1", Y1), ("armchair", armchair)):
        if np.any(np.abs(np.linalg.norm(vec, axis=-1) - 1.0) > UNIT_VECTOR_TOL):
            raise GeometryError(f"{name} must be a unit vector")
    return np.arccos(np.clip(np.einsum("...i,...i->...", Y1, armchair), -1.0, 1.0))
