"""Exception types shared across the solver."""


class SolverError(Exception):
    """Base class for all solver-specific failures."""


class DomainError(SolverError):
    """State left the validity domain of the equation of state."""


class UnsupportedFamily(SolverError):
    """Operation is not defined for this EOS family."""


class ConstraintError(SolverError):
    """Scaling constraints leave no free exponent to tune."""


class InvalidExponent(SolverError):
    """Exponent outside the admissible range (e.g. alpha <= -1 for a cavity)."""


class NoRoot(SolverError):
    """No compression ratio satisfies the jump relations."""


class EntropyViolation(SolverError):
    """Jump root exists but the post-state is not subsonic."""


class SingularPoint(SolverError):
    """ODE right-hand side evaluated too close to a singular locus."""


class NoSignChange(SolverError):
    """Shooting residual has the same sign at both bracket endpoints."""

    def __init__(self, msg, scan=None):
        super().__init__(msg)
        self.scan = scan or []


class MaxIterations(SolverError):
    """Iteration limit reached before convergence."""


class CrossingFailure(SolverError):
    """Post-sonic continuation immediately re-encountered the sonic locus."""


class GridError(SolverError):
    """Finite-difference stencil crosses the jump or leaves the region."""


class ConfigError(SolverError):
    """Malformed or inconsistent run configuration."""
