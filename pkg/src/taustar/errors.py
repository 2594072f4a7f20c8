"""Exception hierarchy shared by every module."""


class TauStarError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(TauStarError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateInputError(TauStarError, ValueError):
    """The input is valid but the requested quantity is undefined for it."""


class ResourceError(TauStarError, RuntimeError):
    """A size guard was exceeded."""


class UnsupportedError(TauStarError, TypeError):
    """The operation is not defined for this kind of input."""


class ParseError(TauStarError, ValueError):
    """Malformed text input.

    Parameters
    ----------
    message : str
        What went wrong.
    line : int, optional
        1-based line number of the offending line.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
