"""Exception hierarchy shared by all modules."""


class FinslerAuditError(Exception):
    """Base class for every error raised by this package."""


class DegenerateDirection(FinslerAuditError):
    """A tangent vector or covector is too close to zero for the requested operation."""


class NotConvex(FinslerAuditError):
    """A norm fails strong convexity (non-positive-definite fundamental tensor)."""


class ConvergenceFailure(FinslerAuditError):
    """An iterative norm computation did not reach its stationarity tolerance."""


class DegenerateReference(FinslerAuditError):
    """A linearized operator was asked to use a vanishing reference field."""


class IntegrationBlowup(FinslerAuditError):
    """Geodesic integration lost the constant-speed invariant."""


class UnsupportedChart(FinslerAuditError):
    """The operation is not available on the given chart/metric combination."""


class SolverStall(FinslerAuditError):
    """The linear solver did not reach the residual tolerance."""


class TailNotResolved(FinslerAuditError):
    """The exponential tail of a time integral could not be extrapolated reliably."""


class NotNormalized(FinslerAuditError):
    """A measure that must have unit mass does not."""


class NotDensity(FinslerAuditError):
    """A function used as a probability density is negative or not normalized."""


class NotPositive(FinslerAuditError):
    """A function required to be strictly positive is not."""


class HypothesisUnverified(FinslerAuditError):
    """A curvature lower bound passed to a checker exceeds the sampled bound."""


class OverflowRange(FinslerAuditError):
    """An exponential rescaling leaves the floating-point range."""


class ConfigError(FinslerAuditError):
    """A scenario configuration file is malformed."""
