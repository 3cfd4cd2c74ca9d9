"""Exception types shared across the package."""


class AccuracyError(ArithmeticError):
    """A numeric routine could not reach its accuracy target.

    The message carries the best bound actually achieved so callers can
    decide whether the degraded value is still usable.
    """


class PoleCollisionError(ValueError):
    """Gamma-function pole ladders coincide (parameters differ by an integer).

    Callers should perturb the shape parameters slightly and retry; the
    channel builder does this automatically.
    """


class NoIntersectionError(ValueError):
    """Transmitter and receiver pointing axes never meet above the baseline."""


class StatisticalPowerError(RuntimeError):
    """Monte-Carlo sample budget is too small for the requested estimate."""


class ConfigError(ValueError):
    """Invalid, missing, or unknown run-configuration entry."""
