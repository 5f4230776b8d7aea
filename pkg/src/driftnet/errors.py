class ConfigError(ValueError):
    """Invalid experiment or model configuration."""


class InsufficientDataError(ValueError):
    """Too few usable calibration tuples for a well-posed fit."""
