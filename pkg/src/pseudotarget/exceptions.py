"""Exception types raised by the attitude toolkit."""


class AttitudeError(Exception):
    """Base class for every error raised by this package."""


class NotSkew(AttitudeError, ValueError):
    """A matrix passed to ``vee`` has a symmetric part above tolerance."""


class TooFarFromManifold(AttitudeError, ValueError):
    """Projection requested for an input too far from S^3 or SO(3)."""


class NonFiniteState(AttitudeError, FloatingPointError):
    """Integration produced NaN or Inf.

    Attributes
    ----------
    step : int or None
        Index of the integration step that failed, when known.
    """

    def __init__(self, message: str, step: int | None = None):
        if step is not None:
            message = f"{message} (step {step})"
        super().__init__(message)
        self.step = step


class ScenarioError(AttitudeError, ValueError):
    """Invalid scenario description (unknown key, bad value, missing file)."""
