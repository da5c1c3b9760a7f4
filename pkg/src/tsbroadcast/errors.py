class InvalidArgument(ValueError):
    pass


class NotConnectedError(RuntimeError):
    pass


class ConstructionError(RuntimeError):
    """A generated topology failed its own postcondition checks."""


class ConfigError(ValueError):
    pass
