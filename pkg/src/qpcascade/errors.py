"""Exception types raised by qpcascade."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested operation."""


class UnknownMaterialError(KeyError):
    """Requested a material name that is not built in."""


class QuadratureError(RuntimeError):
    """Numerical integration failed to reach the requested tolerance."""


class ConfigError(ValueError):
    """Inconsistent or malformed configuration."""


class CascadeLimitError(RuntimeError):
    """A cascade trial exceeded its iteration cap."""
