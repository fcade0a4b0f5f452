"""Exception hierarchy shared by every module."""


class GeometryError(Exception):
    """Base class for all package errors."""


class SingularPointError(GeometryError, ValueError):
    """Cost evaluated too close to its diagonal singularity."""


class InversionError(GeometryError, RuntimeError):
    """The momentum inversion y(x, p) failed."""


class ZeroMomentumError(InversionError, ValueError):
    pass


class NoConvergenceError(InversionError):
    pass


class SegmentThroughZeroError(InversionError, ValueError):
    pass


class SingularMatrixError(GeometryError, ValueError):
    """Mixed Hessian is (numerically) singular."""


class StepTooSmallError(GeometryError, RuntimeError):
    """Finite-difference estimate is unstable under step refinement."""


class AuditError(GeometryError, RuntimeError):
    """Too many samples failed, or the cost failed a required classification."""


class OffSurfaceError(GeometryError, ValueError):
    pass


class DegenerateGradientError(GeometryError, ValueError):
    pass


class NonTangentError(GeometryError, ValueError):
    pass


class GaussInversionError(GeometryError, RuntimeError):
    """Support-point search did not converge; possible non-convexity witness."""


class OpenCurveError(GeometryError, ValueError):
    pass


class TooFewPointsError(GeometryError, ValueError):
    pass


class LostCurveError(GeometryError, RuntimeError):
    pass


class EmptyLevelSetError(GeometryError, ValueError):
    pass


class NonConvexSublevelError(GeometryError, ValueError):
    """Sub-level set is unbounded, non-convex, or has non-positive curvature."""


class NotTangentError(GeometryError, ValueError):
    pass


class ConfigError(GeometryError, ValueError):
    pass


class UnboundedLevelSetWarning(UserWarning):
    pass
