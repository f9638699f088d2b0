"""Exception hierarchy.

Every error raised by the engine derives from :class:`BranchflipError`, so
callers (the CLI in particular) can catch one type and map it to an exit code.
"""


class BranchflipError(Exception):
    pass


class TriangulationError(BranchflipError, ValueError):
    pass


class NonPerfectMatching(TriangulationError):
    pass


class Disconnected(TriangulationError):
    pass


class SlotSelfMatch(TriangulationError):
    pass


class BranchingError(BranchflipError, ValueError):
    pass


class NotABranching(BranchingError):
    pass


class NotAmbiguous(BranchingError):
    pass


class DifferentOwner(BranchingError):
    pass


class NotOrientable(BranchflipError, ValueError):
    pass


class MoveError(BranchflipError, ValueError):
    pass


class TrappedEdge(MoveError):
    pass


class BadNutshell(MoveError):
    pass


class BadStar(MoveError):
    pass


class IllegalChoice(MoveError):
    pass


class ReplayError(MoveError):
    """A move failed while replaying a log; ``step`` is the failing index."""

    def __init__(self, step, cause):
        super().__init__(f"step {step}: {cause}")
        self.step = step
        self.cause = cause


class NotACycle(BranchflipError, ValueError):
    pass


class InconsistentTransport(BranchflipError, ArithmeticError):
    pass


class TransitError(BranchflipError):
    pass


class TrappedEdgesPresent(TransitError, ValueError):
    pass


class NotConnected(TransitError):
    pass


class IterationGuardExceeded(TransitError):
    """Strategy-B connector ran past its iteration guard.

    ``dump`` holds a JSON-ready snapshot of the state at the trip point.
    """

    def __init__(self, message, dump=None):
        super().__init__(message)
        self.dump = dump


class BudgetExhausted(TransitError):
    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats or {}


class UnsupportedSurface(BranchflipError, ValueError):
    pass


class BadVertexCount(BranchflipError, ValueError):
    pass


class SchemaError(BranchflipError, ValueError):
    """Malformed JSON document; ``path`` locates the offending node."""

    def __init__(self, message, path="$"):
        super().__init__(f"{path}: {message}")
        self.path = path
