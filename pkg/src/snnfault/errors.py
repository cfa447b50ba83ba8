"""Exception hierarchy shared across the package."""


class SnnFaultError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(SnnFaultError, ValueError):
    """Invalid configuration value or malformed config file."""


class DataError(SnnFaultError, ValueError):
    """Bad input data: malformed files, dimension mismatches, invalid ranges."""


class UnmappableError(SnnFaultError):
    """A mapping strategy excluded every physical column; nothing can be placed."""


class SimulationFault(SnnFaultError):
    """A membrane potential or input became non-finite during simulation."""
