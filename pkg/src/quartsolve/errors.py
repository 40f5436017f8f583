"""Exception types shared across the solver stack."""


class QuartsolveError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatchError(QuartsolveError, ValueError):
    """An argument's shape is inconsistent with the problem dimensions."""


class InvalidInputError(QuartsolveError, ValueError):
    """Malformed problem data (bad file contents, bad indices, bad config)."""


class NotPositiveDefiniteError(QuartsolveError, ValueError):
    """A matrix required to be positive definite failed to factorize."""


class NumericalFailureError(QuartsolveError, RuntimeError):
    """A numerical routine could not meet its accuracy contract.

    Carries the achieved residual (or other diagnostic scalar) when available.
    """

    def __init__(self, message, residual=None, diagnostics=None):
        super().__init__(message)
        self.residual = residual
        self.diagnostics = diagnostics or {}


class ConvergenceFailureError(QuartsolveError, RuntimeError):
    """An iterative solver hit its iteration cap before certification.

    Carries the best iterate found and the gap bound certified for it, so
    callers can degrade gracefully instead of losing the work.
    """

    def __init__(self, message, best_x=None, certified_gap=None, iterations=None):
        super().__init__(message)
        self.best_x = best_x
        self.certified_gap = certified_gap
        self.iterations = iterations


class SearchFailureError(QuartsolveError, RuntimeError):
    """The rho bisection exhausted its budget without a certifiable return.

    Signals a violated bracket precondition or a too-loose inner tolerance;
    carries the full bisection log for diagnosis.
    """

    def __init__(self, message, bisection_log=None):
        super().__init__(message)
        self.bisection_log = bisection_log or []


class OracleFailureError(QuartsolveError, RuntimeError):
    """Test-infrastructure oracle (reference Newton) could not converge."""
