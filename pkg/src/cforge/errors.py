"""Exception hierarchy shared by the library and the CLI exit-code contract."""


class CforgeError(Exception):
    """Base class for all library errors."""


class InputError(CforgeError):
    """Malformed input file or config (CLI exit code 2)."""


class FitError(CforgeError):
    """Underdetermined or otherwise impossible curve fit (CLI exit code 3)."""


class SolverError(CforgeError):
    """Reparametrization solve failed (CLI exit code 4)."""


class SingularSystemError(SolverError):
    """The truncated linear system is numerically singular."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class NonMonotoneThetaError(SolverError):
    """Recovered boundary correspondence is not strictly increasing."""


class PipelineError(CforgeError):
    """Pipeline precondition violated (CLI exit code 5)."""


class SectorViolationError(PipelineError):
    """Normalized domain leaves the sector required by the straightening power."""


class SelfIntersectionError(PipelineError):
    """Transformed boundary intersects itself."""


class RefitQualityError(PipelineError):
    """Refit of a transformed boundary deviates from the samples beyond tolerance."""


class DomainError(CforgeError):
    """Point outside the validity region of a root approximant."""


class WindingError(CforgeError):
    """Boundary winding about a required point is not the expected value."""


class QuadratureError(CforgeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class DegreeOverflowError(CforgeError):
    """Symbolic normal form would exceed the polynomial degree guard."""
