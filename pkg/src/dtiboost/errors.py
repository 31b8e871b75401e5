"""Exception types shared across the dtiboost package."""


class DtiboostError(Exception):
    """Base class for all dtiboost errors."""


class ParseError(DtiboostError):
    """Malformed input file.

    ``line`` is 1-based when known; ``column`` names the offending field.
    """

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        prefix = ""
        if line is not None:
            prefix = f"line {line}: "
        if column is not None:
            message = f"{message} (column {column})"
        super().__init__(prefix + message)


class ParseWarning(UserWarning):
    """Recoverable oddity in an input file (e.g. a duplicate edge)."""


class DegenerateInputError(DtiboostError):
    """Profile too short for the requested feature (empty or ill-defined sum)."""


class MissingDataError(DtiboostError):
    """A referenced identifier has no data available."""


class UnavailableError(DtiboostError):
    """Record not cached and networking is disabled."""


class RemoteError(DtiboostError):
    """Remote registry returned a failure."""

    def __init__(self, message, status=None):
        self.status = status
        super().__init__(message)


class ModelFormatError(DtiboostError):
    """Model file is corrupt, truncated, or has an unsupported version."""
