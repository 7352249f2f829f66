"""Exceptions raised across risopt."""


class RisOptError(Exception):
    """Base class for every error raised by this package."""


class NotHermitian(RisOptError, ValueError):
    pass


class NotPositiveDefinite(RisOptError, ValueError):
    pass


class NoConvergence(RisOptError, RuntimeError):
    pass


class DimensionMismatch(RisOptError, ValueError):
    pass


class WrongTopology(RisOptError, TypeError):
    pass


class CoincidentElements(RisOptError, ValueError):
    pass


class InvalidRicianFactor(RisOptError, ValueError):
    pass


class NonmonotoneDetected(RisOptError, RuntimeError):
    """Objective increased between iterations beyond the allowed slack."""


class ConfigError(RisOptError, ValueError):
    pass


class ConfigParseError(ConfigError):
    pass


class ConfigValidationError(ConfigError):
    def __init__(self, message: str, field_paths: list[str] | None = None):
        super().__init__(message)
        self.field_paths = field_paths or []


class RankDeficientWarning(UserWarning):
    """Channel has fewer usable singular directions than requested streams."""
