"""Exception hierarchy. The CLI maps each class to an exit code."""


class IsobnError(Exception):
    exit_code = 2


class NetworkError(IsobnError, ValueError):
    """Structural problem with a network description."""


class SignError(IsobnError, ValueError):
    """Malformed or conflicting qualitative influence."""


class PriorError(IsobnError, ValueError):
    """Beta prior inconsistent with the declared order."""


class ParseError(IsobnError, ValueError):
    def __init__(self, message, line=None, column=None, source=None):
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
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class FeasibilityError(IsobnError):
    """A component has too many lower sets to enumerate."""

    exit_code = 3

    def __init__(self, message, estimated=None, cap=None):
        self.estimated = estimated
        self.cap = cap
        super().__init__(message)


class InternalInvariantError(IsobnError, AssertionError):
    """A result violated a guarantee the algorithms are supposed to provide."""

    exit_code = 4
