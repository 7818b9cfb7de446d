"""Exception hierarchy.

Every library error derives from :class:`WalkgenError` so callers (and the
command line front end) can map domain failures to a single exit code.
"""


class WalkgenError(Exception):
    """Base class for all domain errors raised by walkgen."""


class GraphError(WalkgenError):
    pass


class TadpoleEdge(GraphError):
    pass


class NonpositiveLength(GraphError):
    pass


class DanglingReference(GraphError):
    pass


class DisconnectedGraph(GraphError):
    pass


class NoExternalLines(GraphError):
    pass


class DuplicateId(GraphError):
    pass


class NotAWalk(WalkgenError):
    pass


class UnknownEdge(WalkgenError):
    pass


class UnknownVertex(WalkgenError):
    pass


class ShapeMismatch(WalkgenError):
    pass


class NoInternalLines(WalkgenError):
    pass


class SingularD(WalkgenError):
    """``I - K(beta)`` is numerically singular; ``beta`` lies on (or near) the
    discrete singular set of the closed form."""

    def __init__(self, message, rcond=None):
        super().__init__(message)
        self.rcond = rcond


class Overflow(WalkgenError):
    pass


class SingularPencil(WalkgenError):
    pass


class RankDeficient(WalkgenError):
    pass


class InconsistentSystem(WalkgenError):
    pass


class TooManyInternalLines(WalkgenError):
    pass


class ZeroDenominator(WalkgenError):
    pass


class ZeroEntry(WalkgenError):
    pass


class ZeroBeta(WalkgenError):
    pass


class NotStochastic(WalkgenError):
    pass


class IsolatedRemainder(WalkgenError):
    pass


class ColumnsNotEqual(WalkgenError):
    pass


class MultiEdge(WalkgenError):
    pass


class NotNormalized(WalkgenError):
    pass


class ResidualTooLarge(WalkgenError):
    pass
