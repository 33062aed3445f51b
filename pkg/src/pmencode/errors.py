"""Exception hierarchy.

Two families matter to callers: :class:`DataError` means the input data is
unusable, :class:`ConfigError` means the request itself is malformed.  The
command-line tool maps them to exit codes 1 and 2.
"""


class PMEncodeError(Exception):
    pass


class DataError(PMEncodeError, ValueError):
    pass


class ConfigError(PMEncodeError, ValueError):
    pass


class ParseError(DataError):
    """Malformed input.  ``line`` and ``column`` are 1-based when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None, source: str | None = None):
        self.line = line
        self.column = column
        self.source = source
        where = []
        if source:
            where.append(str(source))
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


class ValidationError(DataError):
    pass


class ValuationError(DataError):
    pass


class InsufficientDataError(DataError):
    pass


class DegenerateError(DataError):
    pass


class PredicateError(ConfigError):
    """Bad filter predicate.  ``position`` is a 0-based character offset when known."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        super().__init__(message if position is None else f"{message} (at position {position})")
