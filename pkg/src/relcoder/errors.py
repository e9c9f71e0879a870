"""Exception types raised by the toolkit."""


class RelcoderError(Exception):
    """Base class for toolkit errors."""


class DimensionMismatch(RelcoderError, ValueError):
    pass


class InvalidCone(RelcoderError, ValueError):
    pass


class PointNotInSet(RelcoderError, ValueError):
    pass


class EmptyRestriction(RelcoderError, ValueError):
    pass


class EmptyValue(RelcoderError, ValueError):
    """Raised when a set-valued map has an empty value at the query point."""


class BaseNotInGraph(RelcoderError, ValueError):
    pass


class NonConvexConstraint(RelcoderError, ValueError):
    pass


class ThetaNotInImage(RelcoderError, ValueError):
    pass


class NotExtremal(RelcoderError, ValueError):
    pass


class PreconditionViolated(RelcoderError, ValueError):
    pass


class InstanceError(RelcoderError, ValueError):
    """Malformed instance document. ``path`` locates the offending field."""

    def __init__(self, message: str, path: str = "", line: int | None = None, column: int | None = None):
        self.path = path
        self.line = line
        self.column = column
        where = []
        if path:
            where.append(f"at {path}")
        if line is not None:
            where.append(f"line {line} column {column}")
        super().__init__(message + (" (" + ", ".join(where) + ")" if where else ""))


class EmptyGraph(RelcoderError, ValueError):
    """A multimap was built from pieces that are all empty."""


class IntermediateNotInG(RelcoderError, ValueError):
    pass


class SumMismatch(RelcoderError, ValueError):
    pass
