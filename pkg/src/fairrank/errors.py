"""Exception hierarchy.

Everything raised on purpose by the library derives from :class:`FairRankError`
so callers (and the CLI's exit-code mapping) can catch the family at once.
"""


class FairRankError(Exception):
    """Base class for library errors."""


class InfeasibleConstraints(FairRankError, ValueError):
    """Constraint set is malformed or admits no group-fair representation.

    ``inequality`` names the failing condition, e.g. ``"sum(L) <= k"``.
    """

    def __init__(self, message, inequality=None):
        super().__init__(message)
        self.inequality = inequality


class NoFeasiblePoint(FairRankError):
    pass


class InsufficientItems(FairRankError, ValueError):
    def __init__(self, group, needed, available):
        super().__init__(
            f"group {group} needs {needed} items but its in-group ranking has {available}"
        )
        self.group = group
        self.needed = needed
        self.available = available


class DeltaTooSmall(FairRankError):
    """The walk sampler needs an inner ball of radius >= 1; use the DP sampler."""


class WalkNotMixed(FairRankError):
    """A walk iterate left the expanded polytope (numerical failure)."""


class RejectionBudgetExceeded(FairRankError):
    pass


class BlockInfeasible(FairRankError):
    def __init__(self, checkpoint, message=None):
        super().__init__(message or f"no feasible block ending at checkpoint {checkpoint}")
        self.checkpoint = checkpoint


class InstanceTooLarge(FairRankError, ValueError):
    pass


class TooFewSamples(FairRankError, ValueError):
    pass


class MissingScore(FairRankError, KeyError):
    def __init__(self, item):
        super().__init__(item)
        self.item = item

    def __str__(self):
        return f"no score for item {self.item!r}"


class ParseError(FairRankError, ValueError):
    def __init__(self, message, line=None):
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{message}{where}")
        self.line = line


class UnknownColumn(ParseError):
    pass


class EmptyGroup(ParseError):
    pass
