"""Exception types shared across the package."""


class DataError(ValueError):
    """Malformed or inconsistent input data (bad file, unknown drug, bad label)."""


class ConfigError(ValueError):
    """Invalid configuration or out-of-range parameter."""
