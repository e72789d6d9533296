"""Exception types shared across the package.

Everything deriving from DataError means "the input data was bad"; the CLI
maps those to exit code 2 and leaves usage problems (exit 1) to argparse.
"""


class DataError(Exception):
    """Base class for malformed or out-of-contract input data."""


class EmptyStreamError(DataError):
    """An operation that needs at least one event got an empty stream."""


class MalformedFileError(DataError):
    """A binary event file does not match its documented layout."""


class EventBoundsError(DataError):
    """An event violates the sensor geometry or field invariants."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class CsvParseError(DataError):
    """A text event file failed to parse; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class TensorFormatError(DataError):
    """Base class for tensor container decode failures."""


class BadMagicError(TensorFormatError):
    pass


class UnknownDtypeError(TensorFormatError):
    pass


class TruncatedPayloadError(TensorFormatError):
    pass


class ValueRangeError(DataError):
    """A tensor value cannot be represented in the requested dtype."""
