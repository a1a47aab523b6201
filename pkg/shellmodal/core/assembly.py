"""
Finite Element Assembly Module.
Mass matrix, internal force and tangent stiffness of the rotation-free shell,
the boundary rotation penalty, and Dirichlet reduction.

Element blocks are evaluated for chunks of elements at once and scattered
into scipy sparse matrices through a precomputed (rows, cols) pattern.
"""

import logging
from dataclasses import dataclass, replace
from typing import Iterator, Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import norm as sparse_norm

from ..errors import DiscretizationError
from .discretization import BasisValues, QuadratureSet, ShellModel
from .geometry import SurfaceFrame, evaluate_kinematics
from .material import material_response, strain_energy

logger = logging.getLogger(__name__)

CHUNK_ELEMENTS = 256
EYE3 = np.eye(3)


# ==========================================
# System container
# ==========================================
@dataclass(frozen=True)
class SystemMatrices:
    """Assembled mass, stiffness and force vectors over the listed dofs."""

    M: sparse.csr_matrix
    K: sparse.csr_matrix
    f_int: np.ndarray
    f_ext: np.ndarray
    dofs: np.ndarray

    @property
    def residual(self) -> np.ndarray:
        return self.f_int - self.f_ext

    @property
    def size(self) -> int:
        return self.dofs.shape[0]


# ==========================================
# Sparse pattern and scatter
# ==========================================
def element_dofs(conn: np.ndarray) -> np.ndarray:
    """(n_elements, 3 nen) dof indices in local ordering 3 k + component."""
    return (3 * conn[:, :, None] + np.arange(3)[None, None, :]).reshape(conn.shape[0], -1)


@dataclass(frozen=True)
class SparsePattern:
    """COO coordinates of all element blocks of one quadrature set."""

    rows: np.ndarray
    cols: np.ndarray
    edofs: np.ndarray
    n_dofs: int

    @classmethod
    def from_conn(cls, conn: np.ndarray, n_dofs: int) -> "SparsePattern":
        edofs = element_dofs(conn)
        ne = edofs.shape[1]
        rows = np.repeat(edofs, ne, axis=1).ravel()
        cols = np.tile(edofs, (1, ne)).ravel()
        return cls(rows=rows, cols=cols, edofs=edofs, n_dofs=n_dofs)

    def matrix(self, blocks: np.ndarray) -> sparse.csr_matrix:
        """Sum element blocks (n_elements, 3 nen, 3 nen) into a CSR matrix."""
        coo = sparse.coo_matrix((blocks.ravel(), (self.rows, self.cols)), shape=(self.n_dofs, self.n_dofs))
        return coo.tocsr()

    def vector(self, blocks: np.ndarray) -> np.ndarray:
        """Sum element vectors (n_elements, 3 nen) into a global vector."""
        return np.bincount(self.edofs.ravel(), weights=blocks.ravel(), minlength=self.n_dofs)


def surface_pattern(model: ShellModel) -> SparsePattern:
    pattern = model.cache.get("surface_pattern")
    if pattern is None:
        pattern = SparsePattern.from_conn(model.quadrature.conn, model.n_dofs)
        model.cache["surface_pattern"] = pattern
    return pattern


def boundary_pattern(model: ShellModel) -> SparsePattern:
    pattern = model.cache.get("boundary_pattern")
    if pattern is None:
        pattern = SparsePattern.from_conn(model.boundary_quadrature.conn, model.n_dofs)
        model.cache["boundary_pattern"] = pattern
    return pattern


def iter_chunks(quadrature: QuadratureSet, size: int = CHUNK_ELEMENTS) -> Iterator[Tuple[slice, slice]]:
    """Yield (element slice, point slice) pairs covering the quadrature set."""
    ng = quadrature.n_gauss
    for start in range(0, quadrature.n_elements, size):
        stop = min(start + size, quadrature.n_elements)
        yield slice(start, stop), slice(start * ng, stop * ng)


def chunk_basis(quadrature: QuadratureSet, points: slice) -> BasisValues:
    basis = quadrature.basis
    return BasisValues(basis.N[points], basis.dN[points], basis.ddN[points])


def sum_gauss(values: np.ndarray, n_gauss: int) -> np.ndarray:
    """Sum per-point element contributions over the Gauss points of each element."""
    return values.reshape((-1, n_gauss) + values.shape[1:]).sum(axis=1)


def _node_blocks(scalar: np.ndarray, outer: np.ndarray) -> np.ndarray:
    """Combine nodal couplings (q, I, J) with 3x3 blocks (q, 3, 3) into (q, 3 nen, 3 nen)."""
    q, nen, _ = scalar.shape
    block = scalar[:, :, None, :, None] * outer[:, None, :, None, :]
    return block.reshape(q, 3 * nen, 3 * nen)


def covariant_second_derivatives(dN: np.ndarray, ddN: np.ndarray, christoffel: np.ndarray) -> np.ndarray:
    """N_{;ab} = N_{,ab} - Gamma^g_{ab} N_{,g}, shape (q, 2, 2, nen)."""
    return ddN - np.einsum("qgab,qgn->qabn", christoffel, dN)


# ==========================================
# Mass
# ==========================================
def assemble_mass(model: ShellModel) -> sparse.csr_matrix:
    """
    Consistent mass matrix M = int rho0 N^T N dA over the reference surface.

    The result is cached on the model.

    Args:
        model: Shell model

    Returns:
        Symmetric positive definite CSR matrix (n_dofs x n_dofs)
    """
    M = model.cache.get("mass")
    if M is not None:
        return M
    quad = model.quadrature
    frame = model.reference_frame
    dA = quad.weight * frame.area_factor * model.params.rho0
    N = quad.basis.N
    scalar = sum_gauss(dA[:, None, None] * N[:, :, None] * N[:, None, :], quad.n_gauss)
    blocks = _node_blocks(scalar, np.broadcast_to(EYE3, (scalar.shape[0], 3, 3)))
    M = surface_pattern(model).matrix(blocks)
    model.cache["mass"] = M
    logger.debug("mass matrix assembled: %d dofs, total mass %.6g", model.n_dofs, dA.sum())
    return M


# ==========================================
# Internal force and tangent
# ==========================================
def _chunk_state(model: ShellModel, u: np.ndarray, elements: slice, points: slice):
    quad = model.quadrature
    basis = chunk_basis(quad, points)
    conn = np.repeat(quad.conn[elements], quad.n_gauss, axis=0)
    ref = model.ref_points[conn]
    cur = ref + u.reshape(-1, 3)[conn]
    state = evaluate_kinematics(ref, cur, basis, armchair=model.armchair[points])
    return state, basis


def internal_energy(model: ShellModel, u: np.ndarray) -> float:
    """Total strain energy int W dA of the displacement field u."""
    u = np.asarray(u, dtype=float)
    total = 0.0
    for elements, points in iter_chunks(model.quadrature):
        state, _ = _chunk_state(model, u, elements, points)
        dA = model.quadrature.weight[points] * np.sqrt(state.reference.det)
        total += float(np.sum(strain_energy(state, model.params) * dA))
    return total


def assemble_internal(model: ShellModel, u: np.ndarray, with_tangent: bool = True) -> Tuple[np.ndarray, Optional[sparse.csr_matrix]]:
    """
    Internal force vector and tangent stiffness (material plus geometric).

    f_I = int [tau^{ab} N_{I,a} a_b + M0^{ab} N_{I;ab} n] dA
    K   = k_tt + k_tM + k_Mt + k_MM + k_tau + k_M1 + k_M2 + k_M2^T

    Args:
        model: Shell model
        u: Full displacement vector (n_dofs,)
        with_tangent: Skip the stiffness when only the force is needed

    Returns:
        Tuple of (f_int (n_dofs,), K (CSR) or None)

    Raises:
        DegenerateMetricError: if an element is inverted
    """
    u = np.asarray(u, dtype=float)
    quad = model.quadrature
    pattern = surface_pattern(model)
    nen = model.patch.nen
    f_blocks = np.zeros((quad.n_elements, 3 * nen))
    k_blocks = np.zeros((quad.n_elements, 3 * nen, 3 * nen)) if with_tangent else None

    for elements, points in iter_chunks(quad):
        state, basis = _chunk_state(model, u, elements, points)
        stress, tangent = material_response(state, model.params)
        dA = quad.weight[points] * np.sqrt(state.reference.det)

        a = state.current.a_cov
        n = state.n_vec
        dN = basis.dN
        Nc = covariant_second_derivatives(dN, basis.ddN, state.christoffel)
        tau = stress.tau_ab
        M0 = stress.M0_ab

        f_q = np.einsum("qab,qan,qbi->qni", tau, dN, a) + np.einsum("qab,qabn,qi->qni", M0, Nc, n)
        f_blocks[elements] = sum_gauss((f_q * dA[:, None, None]).reshape(len(dA), -1), quad.n_gauss)

        if not with_tangent:
            continue

        q = len(dA)
        membrane_op = np.einsum("qaI,qbi->qabIi", dN, a)
        bending_op = np.einsum("qabI,qi->qabIi", Nc, n)
        k_mat = (
            np.einsum("qabgd,qabIi,qdgJj->qIiJj", tangent.c_abgd, membrane_op, membrane_op, optimize=True)
            + np.einsum("qabgd,qabIi,qgdJj->qIiJj", tangent.d_abgd, membrane_op, bending_op, optimize=True)
            + np.einsum("qabgd,qabIi,qdgJj->qIiJj", tangent.e_abgd, bending_op, membrane_op, optimize=True)
            + np.einsum("qabgd,qabIi,qgdJj->qIiJj", tangent.f_abgd, bending_op, bending_op, optimize=True)
        ).reshape(q, 3 * nen, 3 * nen)

        k_tau = _node_blocks(np.einsum("qab,qaI,qbJ->qIJ", tau, dN, dN), np.broadcast_to(EYE3, (q, 3, 3)))
        bM = np.einsum("qab,qab->q", state.b_ab, M0)
        nn = n[:, :, None] * n[:, None, :]
        k_m1 = _node_blocks(
            -bM[:, None, None] * np.einsum("qgd,qgI,qdJ->qIJ", state.current.metric_inv, dN, dN), nn
        )
        moment_curv = np.einsum("qab,qabJ->qJ", M0, Nc)
        k_m2 = -np.einsum("qgI,qi,qgj,qJ->qIiJj", dN, n, state.current.a_con, moment_curv, optimize=True).reshape(
            q, 3 * nen, 3 * nen
        )
        k_q = k_mat + k_tau + k_m1 + k_m2 + np.swapaxes(k_m2, 1, 2)
        k_blocks[elements] = sum_gauss(k_q * dA[:, None, None], quad.n_gauss)

    f_int = pattern.vector(f_blocks)
    K = pattern.matrix(k_blocks) if with_tangent else None
    return f_int, K


# ==========================================
# Rotation penalty
# ==========================================
def rotation_penalty_energy(model: ShellModel, u: np.ndarray) -> float:
    """(k_p / 2) int |n - N|^2 dS along the clamped boundary."""
    if model.penalty == 0.0 or model.boundary_quadrature is None:
        return 0.0
    frame, reference, dS = _boundary_frames(model, np.asarray(u, dtype=float))
    gap = frame.normal - reference.normal
    return 0.5 * model.penalty * float(np.sum(np.einsum("qi,qi->q", gap, gap) * dS))


def _boundary_frames(model: ShellModel, u: np.ndarray):
    quad = model.boundary_quadrature
    conn = quad.point_conn
    ref = model.ref_points[conn]
    cur = ref + u.reshape(-1, 3)[conn]
    reference = model.boundary_reference_frame
    current = SurfaceFrame.from_points(cur, quad.basis, label="current")
    tangent = reference.a_cov[np.arange(quad.n_points), quad.tangent]
    dS = quad.weight * np.linalg.norm(tangent, axis=-1)
    return current, reference, dS


def assemble_rotation_penalty(model: ShellModel, u: np.ndarray) -> Tuple[np.ndarray, sparse.csr_matrix]:
    """
    Force and stiffness of the clamping penalty (k_p / 2) int |n - N|^2 dS.

    With v = n - N and c_g = v . a^g:
        f = -k_p int c_g N_{,g} n dS
        K =  k_p int [(1 - v.n) a^{gd} N_{,g} N_{,d} (n x n) + A + A^T] dS,
        A_{IiJj} = n_i N_{I,g} a^g_j c_e N_{J,e}

    Args:
        model: Shell model with a clamped boundary
        u: Full displacement vector

    Returns:
        Tuple of (f_p (n_dofs,), K_p CSR); zero contributions when no penalty is set
    """
    if model.penalty == 0.0 or model.boundary_quadrature is None:
        return np.zeros(model.n_dofs), sparse.csr_matrix((model.n_dofs, model.n_dofs))

    quad = model.boundary_quadrature
    current, reference, dS = _boundary_frames(model, np.asarray(u, dtype=float))
    weight = model.penalty * dS
    n = current.normal
    a_con = current.a_con
    dN = quad.basis.dN
    q, nen = quad.basis.N.shape

    v = n - reference.normal
    c = np.einsum("qi,qgi->qg", v, a_con)
    cN = np.einsum("qg,qgI->qI", c, dN)
    f_q = -cN[:, :, None] * n[:, None, :]

    nn = n[:, :, None] * n[:, None, :]
    normal_part = _node_blocks(
        (1.0 - np.einsum("qi,qi->q", v, n))[:, None, None] * np.einsum("qgd,qgI,qdJ->qIJ", current.metric_inv, dN, dN),
        nn,
    )
    cross = np.einsum("qi,qgI,qgj,qJ->qIiJj", n, dN, a_con, cN).reshape(q, 3 * nen, 3 * nen)
    k_q = normal_part + cross + np.swapaxes(cross, 1, 2)

    pattern = boundary_pattern(model)
    f_p = pattern.vector(sum_gauss((f_q * weight[:, None, None]).reshape(q, -1), quad.n_gauss))
    K_p = pattern.matrix(sum_gauss(k_q * weight[:, None, None], quad.n_gauss))
    return f_p, K_p


# ==========================================
# Dirichlet reduction
# ==========================================
def apply_dirichlet(model: ShellModel, system: SystemMatrices) -> SystemMatrices:
    """
    Eliminate the rows and columns of fixed dofs.

    Args:
        model: Shell model carrying fixed_dofs
        system: Full-size system

    Returns:
        SystemMatrices restricted to the free dofs

    Raises:
        DiscretizationError: if every dof is fixed
    """
    free = model.free_dofs
    if free.size == 0:
        raise DiscretizationError("over-constrained model: no free dofs remain", module="assembly")
    if model.fixed_dofs.size == 0:
        return replace(system, dofs=free)
    return SystemMatrices(
        M=system.M[free][:, free].tocsr(),
        K=system.K[free][:, free].tocsr(),
        f_int=system.f_int[free],
        f_ext=system.f_ext[free],
        dofs=free,
    )


def assemble_system(model: ShellModel, u: np.ndarray, f_ext: Optional[np.ndarray] = None) -> SystemMatrices:
    """Full-size system with shell and penalty contributions (contact is added by the caller)."""
    f_int, K = assemble_internal(model, u)
    if model.penalty > 0.0:
        f_p, K_p = assemble_rotation_penalty(model, u)
        f_int = f_int + f_p
        K = K + K_p
    if f_ext is None:
        f_ext = np.zeros(model.n_dofs)
    return SystemMatrices(M=assemble_mass(model), K=K.tocsr(), f_int=f_int, f_ext=f_ext, dofs=np.arange(model.n_dofs))


def symmetry_error(K: sparse.spmatrix) -> float:
    """Relative asymmetry ||K - K^T|| / ||K|| in the Frobenius norm."""
    norm = sparse_norm(K)
    if norm == 0.0:
        return 0.0
    return float(sparse_norm(K - K.T) / norm)
