"""
Solvers Module.
Newton equilibrium along a load program, the generalized eigenproblem
K v = omega^2 M v at every converged state, mode tracking across steps and
instability detection.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigsh, splu
from scipy.sparse.linalg import norm as sparse_norm
from tenacity import retry, retry_if_exception_type, stop_after_attempt

from ..core.assembly import SystemMatrices, apply_dirichlet, assemble_system
from ..core.contact import AdhesionParams, contact_force_and_stiffness
from ..core.discretization import ShellModel
from ..errors import (
    ConfigError,
    ConvergenceError,
    DegenerateMetricError,
    EigenSolverError,
    PenetrationError,
    SingularTangentError,
)
from ..utils.formatting import signed_frequency

logger = logging.getLogger(__name__)

LOAD_KINDS = ("area_stretch", "uniaxial", "axial_strain", "adhesion")
DIRECTIONS = ("armchair", "zigzag", "chiral")

DENSE_LIMIT = 600
RIGID_CUTOFF = 1e-6
MAC_THRESHOLD = 0.6
DIP_FRACTION = 1e-3
SHIFT_ATTEMPTS = 4
RESIDUAL_TOL = 1e-8


# ==========================================
# Load programs
# ==========================================
@dataclass(frozen=True)
class LoadProgram:
    """
    Monotone schedule of one load parameter.

    kind:
        area_stretch: area stretch J imposed through the boundary (plates, disks)
        uniaxial: stretch lambda_1 along direction (tube axis for CNTs)
        axial_strain: engineering strain of a CNT with held end rings (< 0 compresses)
        adhesion: adhesion energy Gamma in N/m
    """

    kind: str
    start: float
    end: float
    steps: int = 10
    direction: str = "armchair"
    adaptive: bool = True
    min_step_fraction: float = 1e-4

    def __post_init__(self):
        if self.kind not in LOAD_KINDS:
            raise ConfigError(f"unknown load kind '{self.kind}' (choose from {', '.join(LOAD_KINDS)})", module="solvers")
        if self.direction not in DIRECTIONS:
            raise ConfigError(f"unknown stretch direction '{self.direction}'", module="solvers")
        if int(self.steps) < 1:
            raise ConfigError(f"load program needs at least one step, got {self.steps}", module="solvers")
        if not 0.0 < self.min_step_fraction < 1.0:
            raise ConfigError("min_step_fraction must lie in (0, 1)", module="solvers")
        if self.kind in ("area_stretch", "uniaxial") and min(self.start, self.end) <= 0.0:
            raise ConfigError("stretch values must be positive", module="solvers")
        if self.kind == "adhesion" and min(self.start, self.end) < 0.0:
            raise ConfigError("adhesion energy must be non-negative", module="solvers")

    @classmethod
    def reference(cls, kind: str = "adhesion") -> "LoadProgram":
        """Single-point program at the unloaded state."""
        value = REFERENCE_VALUES[kind]
        return cls(kind=kind, start=value, end=value, steps=1)

    def schedule(self) -> np.ndarray:
        if self.start == self.end:
            return np.array([float(self.start)])
        return np.linspace(self.start, self.end, int(self.steps) + 1)

    @property
    def span(self) -> float:
        return abs(self.end - self.start)

    @property
    def min_step(self) -> float:
        span = self.span if self.span > 0.0 else 1.0
        return self.min_step_fraction * span


REFERENCE_VALUES = {"area_stretch": 1.0, "uniaxial": 1.0, "axial_strain": 0.0, "adhesion": 0.0}


def check_program(model: ShellModel, program: LoadProgram):
    """Reject load programs the model cannot carry."""
    if program.kind in ("area_stretch", "uniaxial", "axial_strain") and model.is_free:
        raise ConfigError(f"{program.kind} loading needs a supported boundary", module="solvers")
    if program.kind == "area_stretch" and model.kind == "cnt":
        raise ConfigError("area stretch applies to plates and disks", module="solvers")
    if program.kind == "axial_strain" and model.kind != "cnt":
        raise ConfigError("axial strain applies to CNT models", module="solvers")
    if program.kind == "uniaxial" and model.kind != "cnt" and program.direction == "chiral":
        raise ConfigError("the chiral direction applies to CNT axes only", module="solvers")


def _stretch_direction(model: ShellModel, direction: str) -> np.ndarray:
    armchair = np.asarray(model.armchair[0], dtype=float)
    if direction == "armchair":
        return armchair
    return np.cross(np.array([0.0, 0.0, 1.0]), armchair)


def affine_displacement(model: ShellModel, program: LoadProgram, value: float) -> np.ndarray:
    """
    Displacement field of the homogeneous deformation at a load value.

    Its entries on fixed dofs are the prescribed boundary values; elsewhere it
    serves as the continuation predictor increment.

    Args:
        model: Shell model
        program: Load program
        value: Load parameter value

    Returns:
        (n_dofs,) displacement vector
    """
    X = model.ref_points
    u = np.zeros_like(X)
    if program.kind == "area_stretch":
        center = 0.5 * (X.min(axis=0) + X.max(axis=0))
        u[:, :2] = (np.sqrt(value) - 1.0) * (X[:, :2] - center[:2])
    elif program.kind == "uniaxial" and model.kind == "cnt":
        u[:, 2] = (value - 1.0) * X[:, 2]
    elif program.kind == "uniaxial":
        d = _stretch_direction(model, program.direction)
        u = (value - 1.0) * (X @ d)[:, None] * d[None, :]
    elif program.kind == "axial_strain":
        u[:, 2] = value * X[:, 2]
    return u.ravel()


def adhesion_at(program: LoadProgram, value: float, adhesion: Optional[AdhesionParams]) -> Optional[AdhesionParams]:
    """Adhesion in effect at a load value; adhesion programs override Gamma."""
    if program.kind != "adhesion":
        return adhesion
    base = adhesion or AdhesionParams(Gamma=0.0)
    return base.with_gamma(value)


# ==========================================
# Newton equilibrium
# ==========================================
@dataclass(frozen=True)
class NewtonOptions:
    max_iterations: int = 30
    rtol: float = 1e-10
    atol: float = 1e-12
    stol: float = 1e-13
    # a stalled step is accepted only within this multiple of the residual tolerance
    stall_factor: float = 1e3


@dataclass
class Equilibrium:
    """Converged state with its reduced system."""

    u: np.ndarray
    system: SystemMatrices
    iterations: int
    residual: float


def equilibrium_system(model: ShellModel, u: np.ndarray, adhesion: Optional[AdhesionParams] = None) -> SystemMatrices:
    """Full-size system of shell, clamping penalty and adhesion."""
    system = assemble_system(model, u)
    if adhesion is None or adhesion.Gamma == 0.0:
        return system
    f_c, K_c = contact_force_and_stiffness(model, u, adhesion)
    return SystemMatrices(
        M=system.M, K=(system.K + K_c).tocsr(), f_int=system.f_int + f_c, f_ext=system.f_ext, dofs=system.dofs
    )


def gauge_positions(model: ShellModel, adhesion: Optional[AdhesionParams] = None) -> np.ndarray:
    """
    Reduced-system positions held at zero to remove the rigid motions of an unsupported shell.

    Six dofs are picked by pivoted QR of the rigid-motion basis, so the held
    block of that basis is well conditioned. Supported shells and shells on an
    adhesive substrate need none.
    """
    if not model.is_free or (adhesion is not None and adhesion.Gamma != 0.0):
        return np.empty(0, dtype=int)
    gauge = model.cache.get("gauge")
    if gauge is None:
        X = model.ref_points
        motions = [np.tile(axis, len(X)) for axis in np.eye(3)] + [np.cross(axis, X).ravel() for axis in np.eye(3)]
        _, _, pivots = scipy.linalg.qr(np.array(motions), mode="economic", pivoting=True)
        gauge = np.sort(pivots[:6])
        model.cache["gauge"] = gauge
    return gauge


def _solve_tangent(K, rhs: np.ndarray) -> np.ndarray:
    try:
        lu = splu(K.tocsc())
    except RuntimeError as exc:
        raise SingularTangentError(f"tangent factorization failed: {exc}") from exc
    du = lu.solve(rhs)
    if not np.all(np.isfinite(du)):
        raise SingularTangentError("tangent solve produced non-finite values")
    return du


def newton_solve(
    model: ShellModel,
    program: LoadProgram,
    value: float,
    u_guess: np.ndarray,
    adhesion: Optional[AdhesionParams] = None,
    options: Optional[NewtonOptions] = None,
) -> Equilibrium:
    """
    Newton-Raphson solve of f_int(u) = f_ext at one load value.

    Fixed dofs take the prescribed boundary values of the load program; the
    free dofs start from u_guess. An unsupported shell keeps its gauge dofs
    (see gauge_positions) at their starting values. A step below stol ends the
    iteration only when the residual is within stall_factor of the tolerance.

    Args:
        model: Shell model
        program: Load program defining boundary values and Gamma
        value: Target load parameter
        u_guess: Full displacement predictor
        adhesion: Substrate adhesion (Gamma overridden by adhesion programs)
        options: Tolerances and iteration limit

    Returns:
        Equilibrium at the target value

    Raises:
        ConvergenceError: when the iteration limit is reached, the residual blows up or Newton stalls
        SingularTangentError: when the tangent cannot be factorized
        DegenerateMetricError, PenetrationError: from the assembly
    """
    options = options or NewtonOptions()
    free = model.free_dofs
    fixed = model.fixed_dofs
    u = np.array(u_guess, dtype=float, copy=True)
    if fixed.size:
        u[fixed] = affine_displacement(model, program, value)[fixed]
    adhesion = adhesion_at(program, value, adhesion)
    gauge = gauge_positions(model, adhesion)
    active = np.setdiff1d(np.arange(free.size), gauge)

    reference = None
    small_step = False
    for iteration in range(1, options.max_iterations + 1):
        system = apply_dirichlet(model, equilibrium_system(model, u, adhesion))
        residual = float(np.linalg.norm(system.residual))
        if not np.isfinite(residual):
            raise ConvergenceError(f"non-finite residual at {program.kind}={value:.6g}")
        if reference is None:
            reference = residual
        logger.debug("newton %s=%.6g it=%d |r|=%.3e", program.kind, value, iteration, residual)
        tolerance = max(options.rtol * reference, options.atol)
        if residual <= tolerance or (small_step and residual <= options.stall_factor * tolerance):
            return Equilibrium(u=u, system=system, iterations=iteration, residual=residual)
        if small_step:
            raise ConvergenceError(f"newton stalled at {program.kind}={value:.6g} with |r|={residual:.3e}")
        if residual > 1e8 * max(reference, options.atol):
            raise ConvergenceError(f"residual diverged to {residual:.3e} at {program.kind}={value:.6g}")
        du = np.zeros(free.size)
        if gauge.size:
            du[active] = _solve_tangent(system.K[active][:, active], -system.residual[active])
        else:
            du = _solve_tangent(system.K, -system.residual)
        u[free] += du
        small_step = np.linalg.norm(du) <= options.stol * (1.0 + np.linalg.norm(u))

    raise ConvergenceError(
        f"no convergence in {options.max_iterations} iterations at {program.kind}={value:.6g} (|r|={residual:.3e})"
    )


# ==========================================
# Eigen solution
# ==========================================
@dataclass
class ModalSolution:
    """Eigenpairs of one reduced pencil (K, M)."""

    omega2: np.ndarray          # (k,) ascending
    modes: np.ndarray           # (n, k) M-orthonormal
    rigid_omega2: np.ndarray    # eigenvalues classified as rigid-body
    residuals: np.ndarray       # ||K v - w M v|| / (||K|| ||v||)


def _pencil_scale(K, M) -> float:
    dk = np.abs(K.diagonal()).mean()
    dm = np.abs(M.diagonal()).mean()
    return float(dk / dm) if dm > 0.0 else 1.0


class ShiftInvertSolver:
    """
    Shift-invert Lanczos (ARPACK) for the eigenvalues of K v = w M v nearest a shift.

    A failed factorization of K - sigma M moves the shift further below the
    spectrum before the next attempt.
    """

    def __init__(self, K, M, n_eigs: int, sigma: float = 0.0, seed: int = 0):
        self.K = K.tocsc()
        self.M = M.tocsc()
        self.n_eigs = n_eigs
        self.sigma = float(sigma)
        # fixed Lanczos start vector keeps repeated runs identical
        self.v0 = np.random.default_rng(seed).standard_normal(K.shape[0])
        self.scale = _pencil_scale(K, M)
        self.attempt = 0

    def _next_shift(self) -> float:
        self.attempt += 1
        return self.sigma - 1e-6 * self.scale * 10.0 ** self.attempt

    @retry(stop=stop_after_attempt(SHIFT_ATTEMPTS), retry=retry_if_exception_type(EigenSolverError), reraise=True)
    def solve(self) -> Tuple[np.ndarray, np.ndarray]:
        try:
            values, vectors = eigsh(self.K, k=self.n_eigs, M=self.M, sigma=self.sigma, which="LM", v0=self.v0)
        except (RuntimeError, ArpackError, ArpackNoConvergence) as exc:
            failed = self.sigma
            self.sigma = self._next_shift()
            logger.warning("shift-invert at sigma=%.4g failed (%s); retrying at sigma=%.4g", failed, exc, self.sigma)
            raise EigenSolverError(f"eigensolver failed at shift {failed:.4g}: {exc}") from exc
        return values, vectors


def _rayleigh_ritz(K, M, V: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Re-solve the pencil projected on span(V); returns exactly M-orthonormal Ritz pairs."""
    Kr = V.T @ (K @ V)
    Mr = V.T @ (M @ V)
    values, Q = scipy.linalg.eigh(0.5 * (Kr + Kr.T), 0.5 * (Mr + Mr.T))
    return values, V @ Q


def modal_analysis(
    K,
    M,
    n_modes: int = 10,
    shift: float = 0.0,
    n_rigid: int = 0,
    dense_limit: int = DENSE_LIMIT,
) -> ModalSolution:
    """
    Smallest-magnitude eigenpairs of K v = omega^2 M v.

    Negative omega^2 are kept (unstable modes). With n_rigid > 0 eigenvalues
    below 1e-6 of the (n_rigid + 1)-th magnitude are split off as rigid-body
    modes.

    Args:
        K: Reduced symmetric stiffness
        M: Reduced SPD mass
        n_modes: Number of elastic modes requested
        shift: Shift for shift-invert
        n_rigid: Expected rigid-body mode count (6 for free CNTs)
        dense_limit: Below this size a dense solver is used

    Returns:
        ModalSolution

    Raises:
        EigenSolverError: when shift-invert keeps failing
    """
    K = sparse.csr_matrix(K)
    M = sparse.csr_matrix(M)
    n = K.shape[0]
    wanted = min(n_modes + n_rigid, n)
    if n_rigid and shift == 0.0:
        shift = -1e-6 * _pencil_scale(K, M)

    if n < dense_limit or wanted >= n - 1:
        values, vectors = scipy.linalg.eigh(K.toarray(), M.toarray())
        order = np.argsort(np.abs(values - shift), kind="stable")[:wanted]
        values, vectors = values[order], vectors[:, order]
    else:
        values, vectors = ShiftInvertSolver(K, M, wanted, shift).solve()
    values, vectors = _rayleigh_ritz(K, M, vectors)

    rigid = np.zeros(len(values), dtype=bool)
    if n_rigid:
        by_magnitude = np.sort(np.abs(values))
        reference = by_magnitude[min(n_rigid, len(values) - 1)]
        rigid = np.abs(values) < RIGID_CUTOFF * reference
        if rigid.sum() != n_rigid:
            logger.warning("found %d rigid-body modes, expected %d", int(rigid.sum()), n_rigid)

    elastic = np.where(~rigid)[0][:n_modes]
    omega2 = values[elastic]
    modes = vectors[:, elastic]
    order = np.argsort(omega2, kind="stable")
    omega2, modes = omega2[order], modes[:, order]

    k_norm = sparse_norm(K)
    residual = K @ modes - (M @ modes) * omega2[None, :]
    residuals = np.linalg.norm(residual, axis=0) / max(k_norm, 1e-300) / np.maximum(np.linalg.norm(modes, axis=0), 1e-300)
    if residuals.size and residuals.max() > RESIDUAL_TOL:
        logger.warning("eigen-residual %.2e exceeds %.0e", residuals.max(), RESIDUAL_TOL)
    return ModalSolution(omega2=omega2, modes=modes, rigid_omega2=np.sort(values[rigid]), residuals=residuals)


# ==========================================
# Mode tracking
# ==========================================
def mac_matrix(A: np.ndarray, B: np.ndarray, M=None) -> np.ndarray:
    """
    Mass-weighted modal assurance criterion between the columns of A and B.

    MAC_ij = (a_i^T M b_j)^2 / ((a_i^T M a_i)(b_j^T M b_j))
    """
    A = A[:, None] if A.ndim == 1 else A
    B = B[:, None] if B.ndim == 1 else B
    MB = B if M is None else M @ B
    MA = A if M is None else M @ A
    cross = A.T @ MB
    aa = np.einsum("ij,ij->j", A, MA)
    bb = np.einsum("ij,ij->j", B, MB)
    denominator = np.outer(aa, bb)
    return np.divide(cross ** 2, denominator, out=np.zeros_like(denominator), where=denominator > 0.0)


def match_modes(previous: np.ndarray, current: np.ndarray, M=None, threshold: float = MAC_THRESHOLD) -> np.ndarray:
    """
    Greedy MAC assignment of current modes to previous ones.

    Returns:
        (n_current,) index of the matched previous mode, -1 when unmatched
    """
    mac = mac_matrix(previous, current, M)
    assignment = np.full(mac.shape[1], -1, dtype=int)
    work = mac.copy()
    while work.size and np.max(work) >= threshold:
        i, j = np.unravel_index(np.argmax(work), work.shape)
        assignment[j] = i
        work[i, :] = -1.0
        work[:, j] = -1.0
    return assignment


class LabelFactory:
    """Issues fresh mode labels mode1, mode2, ..."""

    def __init__(self, start: int = 1):
        self._counter = itertools.count(start)

    def __call__(self) -> str:
        return f"mode{next(self._counter)}"


def track_modes(
    previous: "ModalStep",
    current: "ModalStep",
    M=None,
    threshold: float = MAC_THRESHOLD,
    fresh: Optional[Callable[[], str]] = None,
) -> List[str]:
    """
    Carry labels from the previous step to the current one.

    Args:
        previous: Labelled step
        current: Step whose modes need labels
        M: Reduced mass matrix for the MAC inner product
        threshold: Minimum MAC for a match
        fresh: Label source for unmatched modes

    Returns:
        Labels of the current modes
    """
    fresh = fresh or LabelFactory(len(previous.labels) + 1)
    assignment = match_modes(previous.modes, current.modes, M, threshold)
    labels = []
    for j, i in enumerate(assignment):
        if i >= 0:
            labels.append(previous.labels[i])
        else:
            label = fresh()
            logger.info("step %d: mode %d unmatched (MAC < %.2f), labelled %s", current.index, j + 1, threshold, label)
            labels.append(label)
    return labels


# ==========================================
# Continuation
# ==========================================
@dataclass
class ModalStep:
    """Equilibrium and spectrum at one load value."""

    index: int
    parameter: float
    omega2: np.ndarray
    modes: np.ndarray
    labels: List[str]
    rigid_omega2: np.ndarray
    residuals: np.ndarray
    u: np.ndarray
    newton_iterations: int = 0

    @property
    def frequencies(self) -> np.ndarray:
        """Signed frequencies in THz."""
        return np.array([signed_frequency(w) for w in self.omega2])

    @property
    def unstable(self) -> np.ndarray:
        return self.omega2 < 0.0


@dataclass(frozen=True)
class Instability:
    label: str
    parameter: float
    kind: str           # crossing | dip | limit | singular


@dataclass
class ModalResult:
    """Spectra of a whole continuation run."""

    program: LoadProgram
    steps: List[ModalStep] = field(default_factory=list)
    instabilities: List[Instability] = field(default_factory=list)
    status: str = "complete"
    message: str = ""

    @property
    def parameters(self) -> np.ndarray:
        return np.array([s.parameter for s in self.steps])

    @property
    def labels(self) -> List[str]:
        seen: Dict[str, None] = {}
        for step in self.steps:
            for label in step.labels:
                seen.setdefault(label, None)
        return list(seen)

    def history(self, label: str) -> Tuple[np.ndarray, np.ndarray]:
        """(parameters, omega^2) of one tracked mode over the steps where it exists."""
        params, values = [], []
        for step in self.steps:
            if label in step.labels:
                params.append(step.parameter)
                values.append(step.omega2[step.labels.index(label)])
        return np.array(params), np.array(values)

    def histories(self) -> Dict[str, Tuple[np.ndarray, np.ndarray]]:
        return {label: self.history(label) for label in self.labels}

    def reference_frequency(self) -> float:
        """Lowest positive frequency of the first step (normalization base)."""
        if not self.steps:
            return float("nan")
        freqs = self.steps[0].frequencies
        positive = freqs[freqs > 0.0]
        return float(positive.min()) if positive.size else float("nan")


@dataclass(frozen=True)
class ContinuationOptions:
    n_modes: int = 10
    shift: float = 0.0
    mac_threshold: float = MAC_THRESHOLD
    dip_fraction: float = DIP_FRACTION
    stop_on_crossing: bool = False
    jump_amplitudes: Tuple[float, ...] = (0.05, 0.2, 0.5)
    newton: NewtonOptions = field(default_factory=NewtonOptions)


Classifier = Callable[[ShellModel, "ModalSolution", np.ndarray], List[str]]


def _modal_step(model, equilibrium: Equilibrium, index: int, value: float, options: ContinuationOptions) -> Tuple[ModalStep, ModalSolution]:
    n_rigid = 6 if model.is_free and model.kind == "cnt" else 0
    system = equilibrium.system
    solution = modal_analysis(system.K, system.M, options.n_modes, options.shift, n_rigid=n_rigid)
    return ModalStep(
        index=index,
        parameter=float(value),
        omega2=solution.omega2,
        modes=solution.modes,
        labels=[],
        rigid_omega2=solution.rigid_omega2,
        residuals=solution.residuals,
        u=equilibrium.u,
        newton_iterations=equilibrium.iterations,
    ), solution


def _jump_predictors(model: ShellModel, equilibrium: Equilibrium, program: LoadProgram, amplitudes: Sequence[float]) -> Iterator[np.ndarray]:
    """Predictors displaced along the softest mode, for passing a limit point."""
    solution = modal_analysis(equilibrium.system.K, equilibrium.system.M, n_modes=1)
    mode = np.zeros(model.n_dofs)
    mode[model.free_dofs] = solution.modes[:, 0]
    mode /= np.max(np.abs(mode))
    vertical = mode.reshape(-1, 3)[:, 2].mean()
    signs = (-1.0, 1.0) if vertical >= 0.0 else (1.0, -1.0)
    if program.kind != "adhesion":
        signs = (1.0, -1.0)
    for amplitude in amplitudes:
        for sign in signs:
            yield equilibrium.u + sign * amplitude * mode


def run_continuation(
    model: ShellModel,
    program: LoadProgram,
    options: Optional[ContinuationOptions] = None,
    adhesion: Optional[AdhesionParams] = None,
    classifier: Optional[Classifier] = None,
    on_step: Optional[Callable[[ModalStep], None]] = None,
) -> ModalResult:
    """
    Equilibrium path with modal analysis at every scheduled load value.

    Failed steps are bisected down to the program's minimum step; past that the
    softest mode is used to jump to a neighbouring branch, and when that fails
    the run stops with partial results.

    Args:
        model: Shell model
        program: Load program
        options: Continuation settings
        adhesion: Substrate adhesion
        classifier: Names the modes of the first step (generic labels otherwise)
        on_step: Called with every finished step

    Returns:
        ModalResult with status complete, unstable or failed
    """
    options = options or ContinuationOptions()
    check_program(model, program)
    result = ModalResult(program=program)
    values = program.schedule()
    fresh = LabelFactory(options.n_modes + 1)

    start = float(values[0])
    u0 = affine_displacement(model, program, start)
    try:
        equilibrium = newton_solve(model, program, start, u0, adhesion, options.newton)
    except (ConvergenceError, SingularTangentError, DegenerateMetricError, PenetrationError) as exc:
        result.status = "failed"
        result.message = str(exc)
        logger.error("initial equilibrium failed: %s", exc)
        return result

    step, solution = _modal_step(model, equilibrium, 0, start, options)
    step.labels = classifier(model, solution, equilibrium.u) if classifier else [f"mode{j + 1}" for j in range(len(step.omega2))]
    result.steps.append(step)
    if on_step:
        on_step(step)
    M = equilibrium.system.M

    current = start
    for index, target in enumerate(values[1:], start=1):
        target = float(target)
        h = target - current
        while abs(target - current) > 1e-14 * max(1.0, abs(target)):
            trial = current + h if abs(h) < abs(target - current) else target
            predictor = equilibrium.u + affine_displacement(model, program, trial) - affine_displacement(model, program, current)
            try:
                equilibrium = newton_solve(model, program, trial, predictor, adhesion, options.newton)
            except SingularTangentError as exc:
                result.instabilities.append(Instability(label="-", parameter=trial, kind="singular"))
                result.status = "unstable"
                result.message = str(exc)
                logger.warning("singular tangent at %s=%.6g; stopping branch", program.kind, trial)
                return result
            except (ConvergenceError, DegenerateMetricError, PenetrationError) as exc:
                if program.adaptive and abs(h) / 2.0 >= program.min_step:
                    h /= 2.0
                    logger.info("step to %s=%.6g failed (%s); bisecting to %.3g", program.kind, trial, exc, h)
                    continue
                jumped = _try_jump(model, program, trial, equilibrium, adhesion, options)
                if jumped is None:
                    result.instabilities.append(Instability(label="-", parameter=current, kind="limit"))
                    result.status = "failed"
                    result.message = str(exc)
                    logger.error("continuation stopped at %s=%.6g: %s", program.kind, current, exc)
                    return result
                result.instabilities.append(Instability(label="-", parameter=trial, kind="limit"))
                logger.warning("limit point near %s=%.6g passed by a branch jump", program.kind, trial)
                equilibrium = jumped
            current = trial
            h = target - current
            logger.info("accepted %s=%.6g in %d iterations", program.kind, current, equilibrium.iterations)

        step, _ = _modal_step(model, equilibrium, index, target, options)
        step.labels = track_modes(result.steps[-1], step, M, options.mac_threshold, fresh)
        previous = result.steps[-1]
        result.steps.append(step)
        if on_step:
            on_step(step)

        crossed = [
            label
            for label, w in zip(step.labels, step.omega2)
            if w <= 0.0 and label in previous.labels and previous.omega2[previous.labels.index(label)] > 0.0
        ]
        if crossed:
            logger.warning("omega^2 crossed zero at %s=%.6g for %s", program.kind, target, ", ".join(crossed))
            if options.stop_on_crossing:
                result.status = "unstable"
                break

    result.instabilities.extend(detect_instability(result, options.dip_fraction))
    if result.instabilities and result.status == "complete":
        result.status = "unstable"
    return result


def _try_jump(model, program, value, equilibrium, adhesion, options) -> Optional[Equilibrium]:
    for predictor in _jump_predictors(model, equilibrium, program, options.jump_amplitudes):
        try:
            return newton_solve(model, program, value, predictor, adhesion, options.newton)
        except (ConvergenceError, SingularTangentError, DegenerateMetricError, PenetrationError):
            continue
    return None


# ==========================================
# Instability detection
# ==========================================
def zero_crossings(parameters: np.ndarray, omega2: np.ndarray) -> List[float]:
    """Linearly interpolated parameters where omega^2 changes sign."""
    crossings = []
    for k in range(len(omega2) - 1):
        w0, w1 = omega2[k], omega2[k + 1]
        if w0 != 0.0 and np.sign(w1) != np.sign(w0):
            p0, p1 = parameters[k], parameters[k + 1]
            crossings.append(float(p0 + (p1 - p0) * w0 / (w0 - w1)))
    return crossings


def frequency_dips(parameters: np.ndarray, omega2: np.ndarray, fraction: float = DIP_FRACTION) -> List[float]:
    """
    Parameters of local minima where positive omega^2 falls below fraction * its initial value.

    A low stretch counts as a dip only if a later sample recovers above the
    threshold; a mode that decays to the end of the sweep is not flagged.
    """
    if len(omega2) < 2 or not omega2[0] > 0.0:
        return []
    threshold = fraction * omega2[0]
    low = (omega2 > 0.0) & (omega2 < threshold)
    dips = []
    k = 0
    while k < len(omega2):
        if not low[k]:
            k += 1
            continue
        stop = k
        while stop + 1 < len(omega2) and low[stop + 1]:
            stop += 1
        segment = slice(k, stop + 1)
        if np.any(omega2[stop + 1:] >= threshold):
            dips.append(float(parameters[segment][np.argmin(omega2[segment])]))
        k = stop + 1
    return dips


def detect_instability(history, dip_fraction: float = DIP_FRACTION) -> List[Instability]:
    """
    Critical parameter values of tracked modes.

    Args:
        history: ModalResult, or a mapping label -> (parameters, omega^2)
        dip_fraction: Relative depth for flagging dips that stay positive

    Returns:
        Instabilities sorted by parameter value
    """
    histories = history.histories() if isinstance(history, ModalResult) else history
    found = []
    for label, (params, omega2) in histories.items():
        params = np.asarray(params, dtype=float)
        omega2 = np.asarray(omega2, dtype=float)
        if len(omega2) < 2:
            continue
        found += [Instability(label, p, "crossing") for p in zero_crossings(params, omega2)]
        found += [Instability(label, p, "dip") for p in frequency_dips(params, omega2, dip_fraction)]
    ascending = True
    if isinstance(history, ModalResult):
        ascending = history.program.end >= history.program.start
    found.sort(key=lambda item: item.parameter if ascending else -item.parameter)
    for item in found:
        logger.warning("instability (%s) of %s at %.6g", item.kind, item.label, item.parameter)
    return found
