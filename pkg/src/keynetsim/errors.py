"""Exception types shared across the package."""


class KeynetsimError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(KeynetsimError, ValueError):
    """A model parameter violates its contract (domain, shape, consistency)."""


class ConfigError(KeynetsimError, ValueError):
    """A configuration file is malformed or contains invalid values.

    The message names the offending section/field so typos are easy to find.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
