"""Exception hierarchy. The CLI maps each family to an exit code."""


class CCEmbedError(Exception):
    exit_code = 1


class ConfigError(CCEmbedError, ValueError):
    """Invalid parameters or configuration."""

    exit_code = 2


class DataError(CCEmbedError, ValueError):
    """Input data that cannot be used (parse failures, wrong topology)."""

    exit_code = 3


class ParseError(DataError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class DisconnectedGraphError(DataError):
    pass


class EmptyNeighborhoodError(DataError):
    pass


class NumericalError(CCEmbedError, ArithmeticError):
    """Non-finite values, indefinite matrices, inconsistent closed forms."""

    exit_code = 4
