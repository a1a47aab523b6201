"""
NURBS Discretization Module.
Patches, basis evaluation with second derivatives, Gauss quadrature and the
shell models for square plates, circular disks and carbon nanotubes.

Conventions:
    - control points are stored as a (n1, n2, 3) grid; global control point
      index is i * n2 + j and dof index is 3 * cp + component
    - local element ordering is k = a * (q + 1) + b
    - a periodic direction uses an extended knot vector whose spacing repeats
      with the period and wraps basis index i onto control point i mod n
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.interpolate import BSpline

from ..errors import DiscretizationError
from .geometry import SurfaceFrame
from .material import BOND_LENGTH_NM, MaterialParams

logger = logging.getLogger(__name__)

BOUNDARY_TYPES = ("simply-supported", "clamped", "free")
PARAM_TOL = 1e-12


class BasisValues(NamedTuple):
    """Shape functions and parametric derivatives."""

    N: np.ndarray     # (..., nen)
    dN: np.ndarray    # (..., 2, nen)
    ddN: np.ndarray   # (..., 2, 2, nen)


# ==========================================
# Knot vectors
# ==========================================
def open_uniform_knots(n_elements: int, degree: int) -> np.ndarray:
    """Clamped uniform knot vector on [0, 1]."""
    return np.concatenate([np.zeros(degree), np.linspace(0.0, 1.0, n_elements + 1), np.ones(degree)])


def periodic_uniform_knots(n_elements: int, degree: int) -> np.ndarray:
    """Extended uniform knot vector whose basis wraps onto n_elements control points."""
    return (np.arange(n_elements + 2 * degree + 1, dtype=float) - degree) / n_elements


def greville_abscissae(knots: np.ndarray, degree: int) -> np.ndarray:
    """Knot averages; control points placed here reproduce affine maps exactly."""
    n = len(knots) - degree - 1
    return np.array([knots[i + 1:i + degree + 1].mean() for i in range(n)])


# ==========================================
# Patch
# ==========================================
@dataclass(frozen=True)
class NurbsPatch:
    """Tensor-product NURBS surface."""

    degrees: Tuple[int, int]
    knots: Tuple[np.ndarray, np.ndarray]
    control_points: np.ndarray              # (n1, n2, 3)
    weights: np.ndarray                     # (n1, n2)
    periodic: Tuple[bool, bool] = (False, False)

    def __post_init__(self):
        if self.control_points.ndim != 3 or self.control_points.shape[2] != 3:
            raise DiscretizationError("control points must form an (n1, n2, 3) grid")
        if self.weights.shape != self.control_points.shape[:2]:
            raise DiscretizationError("weights must match the control grid")
        if np.any(~(self.weights > 0.0)):
            raise DiscretizationError("NURBS weights must be positive")
        for d in range(2):
            p = self.degrees[d]
            U = np.asarray(self.knots[d])
            n = self.control_points.shape[d]
            if p < 2:
                raise DiscretizationError(f"degree {p} in direction {d}; shells need degree >= 2")
            if np.any(np.diff(U) < 0.0):
                raise DiscretizationError(f"knot vector {d} must be non-decreasing")
            expected = n + 2 * p + 1 if self.periodic[d] else n + p + 1
            if len(U) != expected:
                raise DiscretizationError(
                    f"knot vector {d} has {len(U)} entries, expected {expected} for {n} control points"
                )
            if not self.periodic[d]:
                if np.any(U[:p + 1] != U[0]) or np.any(U[-p - 1:] != U[-1]):
                    raise DiscretizationError(f"knot vector {d} must be open (clamped)")
            interior = self.breaks(d)[1:-1]
            for knot in interior:
                if np.count_nonzero(np.abs(U - knot) < PARAM_TOL) > p - 1:
                    raise DiscretizationError(f"interior knot {knot:g} breaks C1 continuity in direction {d}")

    @property
    def shape(self) -> Tuple[int, int]:
        return self.control_points.shape[0], self.control_points.shape[1]

    @property
    def n_control(self) -> int:
        return self.shape[0] * self.shape[1]

    @property
    def nen(self) -> int:
        return (self.degrees[0] + 1) * (self.degrees[1] + 1)

    def n_basis(self, direction: int) -> int:
        return len(self.knots[direction]) - self.degrees[direction] - 1

    def domain(self, direction: int) -> Tuple[float, float]:
        U = self.knots[direction]
        p = self.degrees[direction]
        if self.periodic[direction]:
            return float(U[p]), float(U[len(U) - p - 1])
        return float(U[0]), float(U[-1])

    def breaks(self, direction: int) -> np.ndarray:
        """Element boundaries along one parametric direction."""
        lo, hi = self.domain(direction)
        U = np.asarray(self.knots[direction])
        inside = U[(U >= lo - PARAM_TOL) & (U <= hi + PARAM_TOL)]
        unique = [inside[0]]
        for knot in inside[1:]:
            if knot - unique[-1] > PARAM_TOL:
                unique.append(knot)
        return np.array(unique)

    @property
    def n_elements(self) -> Tuple[int, int]:
        return len(self.breaks(0)) - 1, len(self.breaks(1)) - 1


def _univariate_matrices(patch: NurbsPatch, direction: int, x: np.ndarray) -> List[np.ndarray]:
    """Values, first and second derivatives of all basis functions at x, each (len(x), n_basis)."""
    nb = patch.n_basis(direction)
    spline = BSpline(np.asarray(patch.knots[direction], dtype=float), np.eye(nb), patch.degrees[direction], extrapolate=True)
    return [spline(x), spline.derivative(1)(x), spline.derivative(2)(x)]


def _element_basis(patch: NurbsPatch, direction: int, local: np.ndarray, elements: Optional[np.ndarray] = None):
    """
    Univariate basis on selected elements.

    Args:
        patch: NURBS patch
        direction: 0 or 1
        local: Points in [0, 1] local element coordinates
        elements: Element indices along the direction (all if omitted)

    Returns:
        Tuple of (global indices (ne, p+1), [N, dN, ddN] each (ne, npt, p+1), element lengths (ne,))
    """
    p = patch.degrees[direction]
    U = np.asarray(patch.knots[direction], dtype=float)
    brk = patch.breaks(direction)
    if elements is None:
        elements = np.arange(len(brk) - 1)
    elements = np.asarray(elements, dtype=int)
    left = brk[elements]
    length = brk[elements + 1] - left
    x = left[:, None] + length[:, None] * np.asarray(local, dtype=float)[None, :]

    spans = np.searchsorted(U, left + PARAM_TOL, side="right") - 1
    index = spans[:, None] - p + np.arange(p + 1)[None, :]
    matrices = _univariate_matrices(patch, direction, x.ravel())
    shape = x.shape + (patch.n_basis(direction),)
    values = [np.take_along_axis(m.reshape(shape), index[:, None, :], axis=2) for m in matrices]
    if patch.periodic[direction]:
        index = index % patch.shape[direction]
    return index, values, length


def _tensor_basis(
    patch: NurbsPatch,
    local_u: np.ndarray,
    local_v: np.ndarray,
    elements_u: Optional[np.ndarray] = None,
    elements_v: Optional[np.ndarray] = None,
):
    """
    Rational basis on a block of elements.

    Returns:
        Tuple of (connectivity (nel, nen), BasisValues with shapes (nel, ng, ...),
        element parametric areas (nel,), element lengths (hu (nel,), hv (nel,)))
    """
    iu, (Nu, dNu, ddNu), hu = _element_basis(patch, 0, local_u, elements_u)
    iv, (Nv, dNv, ddNv), hv = _element_basis(patch, 1, local_v, elements_v)
    neu, nev = len(hu), len(hv)
    ng = len(local_u) * len(local_v)
    nen = patch.nen

    def outer(A, B):
        return np.einsum("iga,jhb->ijghab", A, B).reshape(neu * nev, ng, nen)

    n2 = patch.shape[1]
    conn = (iu[:, None, :, None] * n2 + iv[None, :, None, :]).reshape(neu * nev, nen)
    w = patch.weights[iu[:, None, :, None], iv[None, :, None, :]].reshape(neu * nev, 1, nen)

    B = outer(Nu, Nv)
    Bu, Bv = outer(dNu, Nv), outer(Nu, dNv)
    Buu, Bvv, Buv = outer(ddNu, Nv), outer(Nu, ddNv), outer(dNu, dNv)

    W = np.sum(w * B, axis=-1, keepdims=True)
    Wu = np.sum(w * Bu, axis=-1, keepdims=True)
    Wv = np.sum(w * Bv, axis=-1, keepdims=True)
    Wuu = np.sum(w * Buu, axis=-1, keepdims=True)
    Wvv = np.sum(w * Bvv, axis=-1, keepdims=True)
    Wuv = np.sum(w * Buv, axis=-1, keepdims=True)

    R = w * B / W
    Ru = (w * Bu - R * Wu) / W
    Rv = (w * Bv - R * Wv) / W
    Ruu = (w * Buu - 2.0 * Ru * Wu - R * Wuu) / W
    Rvv = (w * Bvv - 2.0 * Rv * Wv - R * Wvv) / W
    Ruv = (w * Buv - Ru * Wv - Rv * Wu - R * Wuv) / W

    dN = np.stack([Ru, Rv], axis=-2)
    ddN = np.stack([np.stack([Ruu, Ruv], axis=-2), np.stack([Ruv, Rvv], axis=-2)], axis=-3)
    h_u = np.repeat(hu, nev)
    h_v = np.tile(hv, neu)
    return conn, BasisValues(R, dN, ddN), h_u * h_v, (h_u, h_v)


def _element_coordinates(patch: NurbsPatch, element: Union[int, Tuple[int, int]]) -> Tuple[int, int]:
    neu, nev = patch.n_elements
    if isinstance(element, (tuple, list)):
        eu, ev = int(element[0]), int(element[1])
    else:
        eu, ev = divmod(int(element), nev)
    if not (0 <= eu < neu and 0 <= ev < nev):
        raise DiscretizationError(f"element {element} outside the {neu}x{nev} patch")
    return eu, ev


def basis_eval(patch: NurbsPatch, element: Union[int, Tuple[int, int]], xi: Sequence[float]) -> BasisValues:
    """
    Evaluate the rational basis of one element at a parametric point.

    Args:
        patch: NURBS patch
        element: Flat element id (eu * n_v + ev) or (eu, ev)
        xi: Parametric point (u, v) in patch coordinates

    Returns:
        BasisValues with N (nen,), dN (2, nen), ddN (2, 2, nen)

    Raises:
        DiscretizationError: if xi lies outside the element box
    """
    eu, ev = _element_coordinates(patch, element)
    local = []
    for d, e in ((0, eu), (1, ev)):
        brk = patch.breaks(d)
        lo, hi = brk[e], brk[e + 1]
        if not (lo - PARAM_TOL <= xi[d] <= hi + PARAM_TOL):
            raise DiscretizationError(f"parameter {xi[d]:g} outside element interval [{lo:g}, {hi:g}]")
        local.append(np.array([(xi[d] - lo) / (hi - lo)]))
    _, basis, _, _ = _tensor_basis(patch, local[0], local[1], np.array([eu]), np.array([ev]))
    return BasisValues(basis.N[0, 0], basis.dN[0, 0], basis.ddN[0, 0])


def element_connectivity(patch: NurbsPatch, element: Union[int, Tuple[int, int]]) -> np.ndarray:
    """Global control point indices of one element in local ordering."""
    eu, ev = _element_coordinates(patch, element)
    conn, _, _, _ = _tensor_basis(patch, np.array([0.5]), np.array([0.5]), np.array([eu]), np.array([ev]))
    return conn[0]


def evaluate_surface(patch: NurbsPatch, params: np.ndarray, values: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Evaluate the surface (or a field carried by the control points) at parametric points.

    Args:
        patch: NURBS patch
        params: (npt, 2) parametric coordinates
        values: (n_control, k) control values; control points if omitted

    Returns:
        (npt, k) evaluated field
    """
    params = np.atleast_2d(np.asarray(params, dtype=float))
    if values is None:
        values = patch.control_points.reshape(-1, 3)
    Bu = _univariate_matrices(patch, 0, params[:, 0])[0]
    Bv = _univariate_matrices(patch, 1, params[:, 1])[0]
    Bu = _fold_periodic(Bu, patch, 0)
    Bv = _fold_periodic(Bv, patch, 1)
    w = patch.weights
    field_grid = values.reshape(patch.shape + (-1,))
    numerator = np.einsum("pa,pb,ab,abk->pk", Bu, Bv, w, field_grid)
    denominator = np.einsum("pa,pb,ab->p", Bu, Bv, w)
    return numerator / denominator[:, None]


def _fold_periodic(matrix: np.ndarray, patch: NurbsPatch, direction: int) -> np.ndarray:
    if not patch.periodic[direction]:
        return matrix
    n = patch.shape[direction]
    folded = np.zeros((matrix.shape[0], n))
    for i in range(matrix.shape[1]):
        folded[:, i % n] += matrix[:, i]
    return folded


def sample_grid(patch: NurbsPatch, resolution: Tuple[int, int]) -> np.ndarray:
    """Parametric sample points (nu * nv, 2) covering the whole patch, v fastest."""
    axes = [np.linspace(*patch.domain(d), resolution[d]) for d in range(2)]
    uu, vv = np.meshgrid(axes[0], axes[1], indexing="ij")
    return np.column_stack([uu.ravel(), vv.ravel()])


# ==========================================
# Knot insertion
# ==========================================
def _insert_knot(U: np.ndarray, p: int, Pw: np.ndarray, u: float) -> Tuple[np.ndarray, np.ndarray]:
    """Boehm insertion of one knot into homogeneous control rows Pw (n, ..., 4)."""
    k = int(np.searchsorted(U, u, side="right") - 1)
    n = Pw.shape[0]
    Q = np.empty((n + 1,) + Pw.shape[1:])
    Q[:k - p + 1] = Pw[:k - p + 1]
    Q[k + 1:] = Pw[k:]
    for i in range(k - p + 1, k + 1):
        alpha = (u - U[i]) / (U[i + p] - U[i])
        Q[i] = alpha * Pw[i] + (1.0 - alpha) * Pw[i - 1]
    return np.insert(U, k + 1, u), Q


def insert_knots(patch: NurbsPatch, direction: int, new_knots: Sequence[float]) -> NurbsPatch:
    """
    Insert knots without changing the geometry.

    Args:
        patch: NURBS patch
        direction: Parametric direction (must not be periodic)
        new_knots: Knot values to insert

    Returns:
        Refined NurbsPatch
    """
    if patch.periodic[direction]:
        raise DiscretizationError("knot insertion is only supported in open directions")
    p = patch.degrees[direction]
    U = np.asarray(patch.knots[direction], dtype=float)
    Pw = np.concatenate([patch.control_points * patch.weights[..., None], patch.weights[..., None]], axis=-1)
    Pw = np.moveaxis(Pw, direction, 0)
    for u in sorted(new_knots):
        if not (U[0] < u < U[-1]):
            raise DiscretizationError(f"knot {u:g} outside the open domain")
        U, Pw = _insert_knot(U, p, Pw, float(u))
    Pw = np.moveaxis(Pw, 0, direction)
    weights = Pw[..., 3]
    knots = list(patch.knots)
    knots[direction] = U
    return NurbsPatch(
        degrees=patch.degrees,
        knots=(knots[0], knots[1]),
        control_points=Pw[..., :3] / weights[..., None],
        weights=weights,
        periodic=patch.periodic,
    )


def refine_uniform(patch: NurbsPatch, divisions: Tuple[int, int]) -> NurbsPatch:
    """Split every element into divisions[d] equal parts along each open direction."""
    for d in range(2):
        if divisions[d] <= 1:
            continue
        brk = patch.breaks(d)
        fractions = np.arange(1, divisions[d]) / divisions[d]
        new = [lo + f * (hi - lo) for lo, hi in zip(brk[:-1], brk[1:]) for f in fractions]
        patch = insert_knots(patch, d, new)
    return patch


# ==========================================
# Quadrature
# ==========================================
@dataclass(frozen=True)
class QuadratureSet:
    """
    Gauss points of a set of elements, element-major.

    Arrays are flat over points (nq = n_elements * n_gauss) so that
    reshape(n_elements, n_gauss, ...) recovers the element blocks.
    """

    conn: np.ndarray         # (n_elements, nen)
    basis: BasisValues       # (nq, nen), (nq, 2, nen), (nq, 2, 2, nen)
    weight: np.ndarray       # (nq,) Gauss weight times parametric measure
    n_gauss: int
    tangent: Optional[np.ndarray] = None   # (nq,) edge direction for boundary sets

    @property
    def n_points(self) -> int:
        return self.weight.shape[0]

    @property
    def n_elements(self) -> int:
        return self.conn.shape[0]

    @property
    def point_conn(self) -> np.ndarray:
        return np.repeat(self.conn, self.n_gauss, axis=0)


def _gauss_01(n: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _flatten(conn, basis: BasisValues, weight: np.ndarray, tangent=None) -> QuadratureSet:
    nel, ng = basis.N.shape[:2]
    flat = BasisValues(
        basis.N.reshape(nel * ng, -1),
        basis.dN.reshape((nel * ng,) + basis.dN.shape[2:]),
        basis.ddN.reshape((nel * ng,) + basis.ddN.shape[2:]),
    )
    return QuadratureSet(conn=conn, basis=flat, weight=weight.reshape(-1), n_gauss=ng, tangent=tangent)


def surface_quadrature(patch: NurbsPatch, n_gauss: Optional[Tuple[int, int]] = None) -> QuadratureSet:
    """(p+1) x (q+1) Gauss points in every element."""
    if n_gauss is None:
        n_gauss = (patch.degrees[0] + 1, patch.degrees[1] + 1)
    xu, wu = _gauss_01(n_gauss[0])
    xv, wv = _gauss_01(n_gauss[1])
    conn, basis, area, _ = _tensor_basis(patch, xu, xv)
    weight = area[:, None] * np.outer(wu, wv).ravel()[None, :]
    return _flatten(conn, basis, weight)


EDGES = ("u0", "u1", "v0", "v1")


def boundary_edges(patch: NurbsPatch) -> List[str]:
    """Edges of the patch that are not closed by periodicity."""
    edges = []
    if not patch.periodic[0]:
        edges += ["u0", "u1"]
    if not patch.periodic[1]:
        edges += ["v0", "v1"]
    return edges


def boundary_quadrature(patch: NurbsPatch, edges: Optional[Sequence[str]] = None) -> Optional[QuadratureSet]:
    """Gauss points along boundary edges; weights measure parametric edge length."""
    edges = boundary_edges(patch) if edges is None else list(edges)
    if not edges:
        return None
    neu, nev = patch.n_elements
    conns, Ns, dNs, ddNs, weights, tangents = [], [], [], [], [], []
    for edge in edges:
        fixed_dir = 0 if edge[0] == "u" else 1
        along = 1 - fixed_dir
        at_end = edge[1] == "1"
        xg, wg = _gauss_01(patch.degrees[along] + 1)
        end_local = np.array([1.0 if at_end else 0.0])
        end_element = np.array([(neu if fixed_dir == 0 else nev) - 1 if at_end else 0])
        if fixed_dir == 0:
            conn, basis, _, (_, h) = _tensor_basis(patch, end_local, xg, end_element, None)
        else:
            conn, basis, _, (h, _) = _tensor_basis(patch, xg, end_local, None, end_element)
        conns.append(conn)
        Ns.append(basis.N)
        dNs.append(basis.dN)
        ddNs.append(basis.ddN)
        weights.append(h[:, None] * wg[None, :])
        tangents.append(np.full(basis.N.shape[:2], along))
    conn = np.concatenate(conns)
    basis = BasisValues(np.concatenate(Ns), np.concatenate(dNs), np.concatenate(ddNs))
    return _flatten(conn, basis, np.concatenate(weights), np.concatenate(tangents).ravel())


def boundary_control_points(patch: NurbsPatch, edges: Optional[Sequence[str]] = None) -> np.ndarray:
    """Indices of control points on the given (default: all open) edges."""
    edges = boundary_edges(patch) if edges is None else list(edges)
    n1, n2 = patch.shape
    grid = np.arange(n1 * n2).reshape(n1, n2)
    picked = []
    for edge in edges:
        if edge == "u0":
            picked.append(grid[0, :])
        elif edge == "u1":
            picked.append(grid[-1, :])
        elif edge == "v0":
            picked.append(grid[:, 0])
        elif edge == "v1":
            picked.append(grid[:, -1])
        else:
            raise DiscretizationError(f"unknown edge '{edge}' (expected one of {', '.join(EDGES)})")
    if not picked:
        return np.array([], dtype=int)
    return np.unique(np.concatenate(picked))


def control_dofs(points: np.ndarray, components: Sequence[int] = (0, 1, 2)) -> np.ndarray:
    """Dof indices of the given control points and displacement components."""
    points = np.asarray(points, dtype=int)
    return np.sort((3 * points[:, None] + np.asarray(components)[None, :]).ravel())


# ==========================================
# Shell model
# ==========================================
@dataclass
class ShellModel:
    """A discretized graphene shell with its boundary setup."""

    kind: str
    patch: NurbsPatch
    params: MaterialParams
    quadrature: QuadratureSet
    armchair: np.ndarray
    fixed_dofs: np.ndarray
    boundary: str = "simply-supported"
    penalty: float = 0.0
    boundary_quadrature: Optional[QuadratureSet] = None
    info: Dict[str, float] = field(default_factory=dict)
    cache: Dict[str, object] = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.boundary not in BOUNDARY_TYPES:
            raise DiscretizationError(f"unknown boundary '{self.boundary}'")
        if self.penalty < 0.0:
            raise DiscretizationError("penalty parameter must be non-negative")
        if self.penalty > 0.0 and self.boundary_quadrature is None:
            raise DiscretizationError("rotation penalty requires boundary quadrature")
        self.fixed_dofs = np.unique(np.asarray(self.fixed_dofs, dtype=int))
        if self.fixed_dofs.size and (self.fixed_dofs[0] < 0 or self.fixed_dofs[-1] >= self.n_dofs):
            raise DiscretizationError("fixed dof index out of range")

    @property
    def ref_points(self) -> np.ndarray:
        return self.patch.control_points.reshape(-1, 3)

    @property
    def n_dofs(self) -> int:
        return 3 * self.patch.n_control

    @cached_property
    def free_dofs(self) -> np.ndarray:
        return np.setdiff1d(np.arange(self.n_dofs), self.fixed_dofs)

    @cached_property
    def reference_frame(self) -> SurfaceFrame:
        points = self.ref_points[self.quadrature.point_conn]
        return SurfaceFrame.from_points(points, self.quadrature.basis, label="reference")

    @cached_property
    def boundary_reference_frame(self) -> Optional[SurfaceFrame]:
        if self.boundary_quadrature is None:
            return None
        points = self.ref_points[self.boundary_quadrature.point_conn]
        return SurfaceFrame.from_points(points, self.boundary_quadrature.basis, label="reference")

    @property
    def is_free(self) -> bool:
        return self.fixed_dofs.size == 0

    def reference_area(self) -> float:
        """Quadrature of unity over the reference surface."""
        return float(np.sum(self.quadrature.weight * self.reference_frame.area_factor))

    def current_points(self, u: np.ndarray) -> np.ndarray:
        return self.ref_points + np.asarray(u, dtype=float).reshape(-1, 3)


def _fixed_for_boundary(patch: NurbsPatch, boundary: str) -> np.ndarray:
    if boundary == "free":
        return np.array([], dtype=int)
    return control_dofs(boundary_control_points(patch))


def _penalty_setup(patch: NurbsPatch, boundary: str, params: MaterialParams, penalty_factor: float):
    if boundary != "clamped":
        return 0.0, None
    if penalty_factor <= 0.0:
        raise DiscretizationError("clamped boundary requires a positive penalty factor")
    return penalty_factor * params.c_bend, boundary_quadrature(patch)


def _check_boundary(boundary: str):
    if boundary not in BOUNDARY_TYPES:
        raise DiscretizationError(f"unknown boundary '{boundary}' (choose from {', '.join(BOUNDARY_TYPES)})")


def make_square_plate(
    edge_length: float,
    elements: Tuple[int, int],
    degree: int = 2,
    params: Optional[MaterialParams] = None,
    boundary: str = "simply-supported",
    armchair: Sequence[float] = (1.0, 0.0, 0.0),
    penalty_factor: float = 1e3,
) -> ShellModel:
    """
    Flat rectangular plate [0, L] x [0, L] on a Greville control net.

    Args:
        edge_length: Edge length L in nm
        elements: (m, n) elements per direction
        degree: Polynomial degree in both directions
        params: Material parameters (GGA + QM if omitted)
        boundary: "simply-supported", "clamped" or "free"
        armchair: Armchair direction in the plate plane
        penalty_factor: Rotation penalty k_p as a multiple of c_bend (clamped only)

    Returns:
        ShellModel
    """
    m, n = int(elements[0]), int(elements[1])
    if m < 2 or n < 2:
        raise DiscretizationError(f"plate needs at least 2x2 elements, got {m}x{n}")
    if degree < 2:
        raise DiscretizationError(f"plate degree must be >= 2, got {degree}")
    if not edge_length > 0.0:
        raise DiscretizationError(f"edge length must be positive, got {edge_length}")
    _check_boundary(boundary)
    params = params or MaterialParams.from_presets()

    ku = open_uniform_knots(m, degree)
    kv = open_uniform_knots(n, degree)
    gu = greville_abscissae(ku, degree) * edge_length
    gv = greville_abscissae(kv, degree) * edge_length
    uu, vv = np.meshgrid(gu, gv, indexing="ij")
    points = np.stack([uu, vv, np.zeros_like(uu)], axis=-1)
    patch = NurbsPatch((degree, degree), (ku, kv), points, np.ones(uu.shape))

    quadrature = surface_quadrature(patch)
    penalty, edge_quadrature = _penalty_setup(patch, boundary, params, penalty_factor)
    model = ShellModel(
        kind="plate",
        patch=patch,
        params=params,
        quadrature=quadrature,
        armchair=np.broadcast_to(np.asarray(armchair, dtype=float), (quadrature.n_points, 3)),
        fixed_dofs=_fixed_for_boundary(patch, boundary),
        boundary=boundary,
        penalty=penalty,
        boundary_quadrature=edge_quadrature,
        info={"edge_length_nm": float(edge_length), "elements": m * n},
    )
    logger.info("square plate %gnm, %dx%d elements, %d dofs", edge_length, m, n, model.n_dofs)
    return model


def disk_patch(radius: float) -> NurbsPatch:
    """Single rational quadratic patch mapping the unit square onto a disk."""
    if not radius > 0.0:
        raise DiscretizationError(f"radius must be positive, got {radius}")
    h = math.sqrt(2.0) / 2.0
    r2 = math.sqrt(2.0)
    points = np.array(
        [
            [[-h, -h, 0.0], [-r2, 0.0, 0.0], [-h, h, 0.0]],
            [[0.0, -r2, 0.0], [0.0, 0.0, 0.0], [0.0, r2, 0.0]],
            [[h, -h, 0.0], [r2, 0.0, 0.0], [h, h, 0.0]],
        ]
    ) * radius
    weights = np.array([[1.0, h, 1.0], [h, 1.0, h], [1.0, h, 1.0]])
    knots = np.array([0.0, 0.0, 0.0, 1.0, 1.0, 1.0])
    return NurbsPatch((2, 2), (knots, knots.copy()), points, weights)


def make_disk(
    radius: float,
    elements: int,
    degree: int = 2,
    params: Optional[MaterialParams] = None,
    boundary: str = "clamped",
    armchair: Sequence[float] = (1.0, 0.0, 0.0),
    penalty_factor: float = 1e3,
) -> ShellModel:
    """
    Circular disk of radius a centered at the origin.

    The boundary is an exact circle; the four patch corners sit on it where the
    parametrization is singular, which Gauss points never touch.

    Args:
        radius: Disk radius in nm
        elements: Elements per parametric direction
        degree: Must be 2 (the rational disk patch is quadratic)
        params: Material parameters (GGA + QM if omitted)
        boundary: "clamped", "simply-supported" or "free"
        armchair: Armchair direction in the plane
        penalty_factor: Rotation penalty as a multiple of c_bend

    Returns:
        ShellModel
    """
    if degree != 2:
        raise DiscretizationError(f"disk patches are quadratic, degree {degree} is not supported")
    if elements < 2:
        raise DiscretizationError(f"disk needs at least 2 elements per direction, got {elements}")
    _check_boundary(boundary)
    params = params or MaterialParams.from_presets()
    patch = refine_uniform(disk_patch(radius), (int(elements), int(elements)))

    quadrature = surface_quadrature(patch)
    penalty, edge_quadrature = _penalty_setup(patch, boundary, params, penalty_factor)
    model = ShellModel(
        kind="disk",
        patch=patch,
        params=params,
        quadrature=quadrature,
        armchair=np.broadcast_to(np.asarray(armchair, dtype=float), (quadrature.n_points, 3)),
        fixed_dofs=_fixed_for_boundary(patch, boundary),
        boundary=boundary,
        penalty=penalty,
        boundary_quadrature=edge_quadrature,
        info={"radius_nm": float(radius), "elements": int(elements) ** 2},
    )
    logger.info("disk r=%gnm, %dx%d elements, %s, %d dofs", radius, elements, elements, boundary, model.n_dofs)
    return model


def cnt_radius(n: int, m: int, bond_length: float = BOND_LENGTH_NM) -> float:
    """Tube radius sqrt(3) a_cc / (2 pi) * sqrt(n^2 + n m + m^2)."""
    return math.sqrt(3.0) * bond_length / (2.0 * math.pi) * math.sqrt(n * n + n * m + m * m)


def chiral_angle(n: int, m: int) -> float:
    """Angle between the chiral vector and the zigzag direction, radians in [0, pi/6]."""
    return math.atan2(math.sqrt(3.0) * m, 2.0 * n + m)


def ring_knots(n_elements: int, degree: int) -> np.ndarray:
    """Extended periodic knots of degree 2 * degree with every break repeated degree + 1 times."""
    multiplicity = degree + 1
    k = np.arange(multiplicity * n_elements + 4 * degree + 1)
    return np.floor((k - degree) / multiplicity) / n_elements


def circle_ring(radius: float, n_elements: int, degree: int = 2) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Exact rational ring x^2 + y^2 = R^2 on a C^(degree-1) periodic basis.

    A half-turn generator z(t) (a uniform spline of the given degree with
    z(t + 1) = -z(t)) is squared: (x, y) = R z^2 / |z|^2. The homogeneous
    coordinates (R Re z^2, R Im z^2, |z|^2) are a periodic spline of degree
    2 * degree on ring_knots, recovered by least squares on the folded basis.

    Args:
        radius: Ring radius in nm
        n_elements: Elements around the ring
        degree: Generator degree (ring degree is twice this)

    Returns:
        Tuple of (knots, control points (n, 2), weights (n,))
    """
    q = int(degree)
    n = int(n_elements)
    angles = math.pi * (np.arange(n + q) - 0.5 * (q - 1)) / n
    generator = BSpline(periodic_uniform_knots(n, q), np.column_stack([np.cos(angles), np.sin(angles)]), q)

    local = (np.arange(2 * q + 3) + 0.5) / (2 * q + 3)
    t = ((np.arange(n)[:, None] + local[None, :]) / n).ravel()
    zt = generator(t)
    z = zt[:, 0] + 1j * zt[:, 1]
    homogeneous = np.column_stack([radius * (z * z).real, radius * (z * z).imag, np.abs(z) ** 2])

    knots = ring_knots(n, q)
    n_basis = len(knots) - 2 * q - 1
    n_control = (q + 1) * n
    basis = BSpline(knots, np.eye(n_basis), 2 * q)(t)
    folded = np.zeros((len(t), n_control))
    for i in range(n_basis):
        folded[:, i % n_control] += basis[:, i]
    coeffs = np.linalg.lstsq(folded, homogeneous, rcond=None)[0]
    weights = coeffs[:, 2]
    if np.any(~(weights > 0.0)):
        raise DiscretizationError("ring weights must be positive")
    return knots, coeffs[:, :2] / weights[:, None], weights


def make_cnt(
    chirality: Tuple[int, int],
    aspect_ratio: float,
    elements: Tuple[int, int],
    degree: int = 2,
    params: Optional[MaterialParams] = None,
    boundary: str = "free",
) -> ShellModel:
    """
    Carbon nanotube on an exact rational cylinder with a periodic C1 closure.

    The circumferential basis comes from circle_ring and has twice the axial
    degree. Parametric u runs around the circumference and v along the axis
    (z from 0 to L), so the normal points outwards.

    Args:
        chirality: (n, m) indices
        aspect_ratio: L / (2 R)
        elements: (circumferential, axial) element counts
        degree: Axial degree (the ring uses 2 * degree)
        params: Material parameters (GGA + QM if omitted)
        boundary: "free" or "simply-supported" (end rings held)

    Returns:
        ShellModel
    """
    n, m = int(chirality[0]), int(chirality[1])
    if n < 0 or m < 0 or (n == 0 and m == 0):
        raise DiscretizationError(f"invalid chirality ({n}, {m})")
    if not aspect_ratio > 0.0:
        raise DiscretizationError(f"aspect ratio must be positive, got {aspect_ratio}")
    n_circ, n_axial = int(elements[0]), int(elements[1])
    if n_circ < 3 or n_axial < 2:
        raise DiscretizationError(f"CNT needs at least 3x2 elements, got {n_circ}x{n_axial}")
    if degree < 2:
        raise DiscretizationError(f"CNT degree must be >= 2, got {degree}")
    if boundary == "clamped":
        raise DiscretizationError("CNT ends support 'free' or 'simply-supported' only")
    _check_boundary(boundary)
    params = params or MaterialParams.from_presets()

    radius = cnt_radius(n, m)
    length = aspect_ratio * 2.0 * radius
    ku, ring, ring_weights = circle_ring(radius, n_circ, degree)
    kv = open_uniform_knots(n_axial, degree)

    z = greville_abscissae(kv, degree) * length
    points = np.empty((len(ring), len(z), 3))
    points[:, :, 0] = ring[:, 0, None]
    points[:, :, 1] = ring[:, 1, None]
    points[:, :, 2] = z[None, :]
    weights = np.repeat(ring_weights[:, None], len(z), axis=1)
    patch = NurbsPatch((2 * degree, degree), (ku, kv), points, weights, periodic=(True, False))

    quadrature = surface_quadrature(patch)
    model = ShellModel(
        kind="cnt",
        patch=patch,
        params=params,
        quadrature=quadrature,
        armchair=np.zeros((quadrature.n_points, 3)),
        fixed_dofs=_fixed_for_boundary(patch, boundary),
        boundary=boundary,
        info={
            "n": n,
            "m": m,
            "radius_nm": radius,
            "length_nm": length,
            "aspect_ratio": float(aspect_ratio),
            "chiral_angle_rad": chiral_angle(n, m),
            "elements": n_circ * n_axial,
        },
    )
    model.armchair = rolled_armchair(model.reference_frame.x, chiral_angle(n, m))
    logger.info("CNT(%d,%d) R=%.4fnm L=%.4fnm, %dx%d elements, %d dofs", n, m, radius, length, n_circ, n_axial, model.n_dofs)
    return model


def rolled_armchair(x: np.ndarray, theta_c: float) -> np.ndarray:
    """
    Armchair direction of a rolled lattice at surface points of a z-axis cylinder.

    x_hat = sin(theta_c) e_circ + cos(theta_c) e_axis, with theta_c the chiral angle.
    """
    phi = np.arctan2(x[..., 1], x[..., 0])
    e_circ = np.stack([-np.sin(phi), np.cos(phi), np.zeros_like(phi)], axis=-1)
    e_axis = np.zeros_like(e_circ)
    e_axis[..., 2] = 1.0
    return math.sin(theta_c) * e_circ + math.cos(theta_c) * e_axis


def quarter_cylinder_patch(radius: float, length: float, elements: Tuple[int, int] = (1, 1)) -> NurbsPatch:
    """
    Exact rational quadratic quarter cylinder (x^2 + y^2 = R^2, x, y >= 0, 0 <= z <= L).

    u runs along the arc from the x-axis towards the y-axis, v along z.
    """
    h = math.sqrt(2.0) / 2.0
    arc = np.array([[radius, 0.0], [radius, radius], [0.0, radius]])
    z = np.array([0.0, 0.5, 1.0]) * length
    points = np.empty((3, 3, 3))
    points[:, :, :2] = arc[:, None, :]
    points[:, :, 2] = z[None, :]
    weights = np.repeat(np.array([1.0, h, 1.0])[:, None], 3, axis=1)
    knots = np.array([0.0, 0.0, 0.0, 1.0, 1.0, 1.0])
    patch = NurbsPatch((2, 2), (knots, knots.copy()), points, weights)
    return refine_uniform(patch, elements)
