"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration value or file."""


class WorldConfigError(ConfigError):
    """A world description cannot be used (bad geometry, unsatisfiable sampling)."""


class NumericFaultError(FloatingPointError):
    """A state or parameter became non-finite."""


class DegenerateLayerError(ValueError):
    """A layer cannot be rescaled because all its weights are zero."""


class ProtocolError(RuntimeError):
    """Evaluation reports were produced under incompatible protocols."""
