INTERNAL_EXIT_CODE = 4


class LclError(Exception):
    """Base class for every error raised by the toolkit."""

    exit_code = 3


class ConfigError(LclError):
    exit_code = 2


class UnknownCheckError(ConfigError):
    pass


class UnknownFunctionError(LclError, KeyError):
    exit_code = 2

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class DomainError(LclError, ValueError):
    pass


class RegistrationError(LclError):
    pass


class DepthLimitError(LclError):
    pass


class SupportExplosionError(LclError):
    pass


class CapExceededError(LclError):
    pass


class SolverError(LclError):
    pass


class DegenerateError(LclError, ValueError):
    pass


class EmptyPoolError(LclError):
    pass


class SerializationError(LclError):
    pass
