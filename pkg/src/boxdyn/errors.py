"""Exception hierarchy shared across the package."""


class BoxdynError(Exception):
    """Base class for all package errors."""


class EmptyIntersection(BoxdynError):
    """A query box does not meet the domain of the vector field."""


class UncoveredRegion(BoxdynError):
    """Part of the queried region is covered by no piece or override."""


class NoEnclosure(BoxdynError):
    """A-priori enclosure inflation failed to converge (step too large)."""


class PreconditionViolated(BoxdynError):
    """An operation was called without its required certificate."""


class NoAttractor(BoxdynError):
    """No step count made the candidate neighborhood contract."""


class DecompositionInconsistent(BoxdynError):
    """Connection check failed beyond slack; the grid is too coarse."""


class EmptyInput(BoxdynError):
    """An operation that needs non-empty sets received an empty one."""


class AnchorFailure(BoxdynError):
    """The decomposition failed at the anchor parameter of a sweep."""


class ParseError(BoxdynError):
    """Configuration text could not be parsed."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class ValidationError(BoxdynError):
    """A parsed configuration violates a structural invariant."""
