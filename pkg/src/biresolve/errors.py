"""Exception hierarchy shared by every module and mapped to CLI exit codes."""


class BiresolveError(Exception):
    """Base class for all library errors."""


class GraphError(BiresolveError, ValueError):
    """Malformed graph: duplicate ids or dangling endpoints."""


class HomomorphismError(BiresolveError, ValueError):
    """A vertex/edge assignment that does not respect adjacency.

    ``edge`` names the first offending domain edge, when there is one.
    """

    def __init__(self, message, edge=None):
        super().__init__(message)
        self.edge = edge


class PreconditionError(BiresolveError, ValueError):
    """A hypothesis of a construction does not hold for the given input."""

    def __init__(self, hypothesis, message=None):
        super().__init__(message or f"{hypothesis} hypothesis fails")
        self.hypothesis = hypothesis


class UnsupportedPresentation(BiresolveError, ValueError):
    """The operation is not defined for this kind of subshift presentation."""


class FormatError(BiresolveError, ValueError):
    """An input document does not follow the expected JSON layout."""


class SearchTimeout(BiresolveError):
    """The subamalgamation search ran out of time; nothing was decided."""


class CapReached(BiresolveError):
    """A bounded search hit its configured cap without finding an answer.

    This is not a claim that no answer exists.
    """

    def __init__(self, message, obstructions=None):
        super().__init__(message)
        self.obstructions = list(obstructions or [])
