"""Exceptions shared across the simulator modules."""


class ConfigurationError(ValueError):
    """Invalid or inconsistent configuration values."""


class BeamEnumerationError(ValueError):
    """Exhaustive codebook enumeration would exceed the size cap."""


class DegenerateGroupError(ValueError):
    """An AP group is empty or has an all-zero rate."""


class DegenerateUserError(ValueError):
    """A user has no serving AP with a usable channel estimate."""
