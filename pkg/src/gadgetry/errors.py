"""Exception types shared across the package."""


class GadgetryError(Exception):
    pass


class FormatError(GadgetryError, ValueError):
    """Malformed input file; carries a 1-based line and column."""

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


class FormatSyntaxError(FormatError):
    pass


class ArityMismatchError(FormatError):
    pass


class UnknownValueError(FormatError):
    """A value, variable or symbol token that was never declared."""


class UndecidedError(GadgetryError):
    """Raised when a question falls outside the territory we can decide."""


class InvariantViolation(GadgetryError):
    """A property guaranteed by the theory failed: indicates a bug."""
