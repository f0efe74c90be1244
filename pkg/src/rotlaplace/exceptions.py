"""Exception and warning types raised across the package."""


class RotLaplaceError(Exception):
    """Base class for all package errors."""


class NonSkewInput(RotLaplaceError, ValueError):
    """A matrix passed to ``vee`` is not skew-symmetric."""


class InvalidResolution(RotLaplaceError, ValueError):
    """Grid resolution (nside or level) outside the supported range."""


class InvalidRotation(RotLaplaceError, ValueError):
    """Input is not a valid rotation matrix / unit quaternion."""


class DegenerateConcentration(RotLaplaceError, ValueError):
    """Tangent covariance undefined because a pair sum of singular values vanishes."""


class SingularAtOrigin(RotLaplaceError, ValueError):
    """The tangent Laplace kernel is singular at the origin."""


class NoProgress(RotLaplaceError, RuntimeError):
    """Backtracking shrank the step below the minimum without decreasing the NLL."""


class DegenerateSvd(RuntimeWarning):
    """Singular values nearly coincide; the trace-of-S derivative falls back to finite differences."""
