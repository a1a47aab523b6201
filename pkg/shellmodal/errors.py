"""
Exception hierarchy.
Every error carries a human-readable message and the name of the module that raised it.
"""


class ShellModalError(Exception):
    """Base error for all shellmodal failures."""

    exit_status = 3

    def __init__(self, message: str, module: str = "shellmodal"):
        super().__init__(message)
        self.message = message
        self.module = module

    def __str__(self):
        return f"[{self.module}] {self.message}"


# ==========================================
# Input errors
# ==========================================
class ConfigError(ShellModalError):
    """Run configuration failed validation."""

    exit_status = 2

    def __init__(self, message: str, module: str = "config"):
        super().__init__(message, module)


class DiscretizationError(ShellModalError):
    """Invalid patch, mesh size or evaluation point."""

    exit_status = 2

    def __init__(self, message: str, module: str = "discretization"):
        super().__init__(message, module)


class MaterialError(ShellModalError):
    """Invalid material parameters."""

    exit_status = 2

    def __init__(self, message: str, module: str = "material"):
        super().__init__(message, module)


class AnalyticalError(ShellModalError):
    """Analytical oracle could not be evaluated."""

    def __init__(self, message: str, module: str = "analytical"):
        super().__init__(message, module)


# ==========================================
# Numerical failures
# ==========================================
class GeometryError(ShellModalError):
    """Kinematic evaluation failed."""

    def __init__(self, message: str, module: str = "geometry"):
        super().__init__(message, module)


class DegenerateMetricError(GeometryError):
    """Current metric lost positive definiteness (element inverted)."""


class ContactError(ShellModalError):
    """Substrate interaction failed."""

    def __init__(self, message: str, module: str = "contact"):
        super().__init__(message, module)


class PenetrationError(ContactError):
    """A quadrature gap fell below the model's validity limit."""


class SolverError(ShellModalError):
    """Nonlinear or eigen solver failure."""

    def __init__(self, message: str, module: str = "solvers"):
        super().__init__(message, module)


class ConvergenceError(SolverError):
    """Newton iterations did not converge."""


class SingularTangentError(SolverError):
    """Tangent stiffness is singular (instability reached)."""


class EigenSolverError(SolverError):
    """Shift-invert factorization or eigen iteration failed."""
