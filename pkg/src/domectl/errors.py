"""Exception types shared across the package."""


class DomeCtlError(Exception):
    """Base class for all package errors."""


class ConfigError(DomeCtlError, ValueError):
    """Invalid configuration: malformed shapes, unknown references, bad sections."""


class DataError(DomeCtlError, ValueError):
    """Input data that cannot be used (schema problems, empty timelines, bad files)."""
