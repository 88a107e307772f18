"""Exception types shared across the package."""


class ArgumentError(ValueError):
    """A caller violated a documented precondition."""


class NumericError(FloatingPointError):
    """A computation produced or encountered a non-finite value."""


class ParseError(ValueError):
    """A text input could not be parsed.

    Carries the 1-based line number when one is known.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class FetchError(OSError):
    """A download failed after all retries."""
