"""Exception hierarchy shared by all bellsep modules."""


class BellsepError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(BellsepError, ValueError):
    """Input violates a documented precondition."""


class CapacityError(BellsepError):
    """Requested size exceeds a configured cap."""


class IdentityViolationError(BellsepError, AssertionError):
    """An algebraic identity that must hold exactly failed; signals a bug."""


class InfeasibleError(BellsepError, ValueError):
    """No object satisfies the requested constraints."""


class ParseError(BellsepError, ValueError):
    """Malformed text or file input.

    ``position`` is a 0-based character offset for polynomial text; ``line`` and
    ``column`` are filled for JSON files when the decoder reports them.
    """

    def __init__(self, message, position=None, line=None, column=None):
        self.position = position
        self.line = line
        self.column = column
        where = []
        if position is not None:
            where.append(f"position {position}")
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
