"""Core domain types: constraints, representations, assignments, rankings.

Groups are 0-based everywhere in code.  A *representation* ``x`` is a tuple of
``ell`` ints (ranks per group) and an *assignment* ``y`` is a tuple of ``k``
group indices (group per rank); both are plain tuples.
"""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

from .errors import InfeasibleConstraints, InsufficientItems

GroupRepresentation = tuple[int, ...]
GroupAssignment = tuple[int, ...]


@dataclass(frozen=True)
class FairnessConstraints:
    """Top-``k`` length and per-group lower/upper representation bounds."""

    k: int
    lower: tuple[int, ...]
    upper: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "lower", tuple(int(v) for v in self.lower))
        object.__setattr__(self, "upper", tuple(int(v) for v in self.upper))

    @property
    def ell(self) -> int:
        return len(self.lower)

    @classmethod
    def from_lists(cls, k, lower, upper) -> FairnessConstraints:
        c = cls(k, tuple(lower), tuple(upper))
        validate(c)
        return c


@dataclass(frozen=True)
class InGroupRanking:
    """Items of one group, best first."""

    group: int
    items: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(str(a) for a in self.items))

    def __len__(self):
        return len(self.items)


@dataclass(frozen=True)
class Ranking:
    """A top-k ranking as ``(item, group)`` pairs, rank 1 first."""

    entries: tuple[tuple[str, int], ...]

    def __len__(self):
        return len(self.entries)

    @property
    def items(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self.entries)

    @property
    def assignment(self) -> GroupAssignment:
        return tuple(g for _, g in self.entries)


def in_group_rankings(lists: Sequence[Sequence[str]]) -> list[InGroupRanking]:
    """Wrap plain per-group item lists, group index = list position."""
    return [InGroupRanking(j, tuple(items)) for j, items in enumerate(lists)]


def validate(constraints: FairnessConstraints, in_group: Sequence[InGroupRanking] | None = None) -> None:
    """Raise :class:`InfeasibleConstraints` unless the constraint set is usable.

    Checks ``0 <= L_j <= U_j <= k`` for every group and
    ``sum(L) <= k <= sum(U)``.  When ``in_group`` is given, each group must
    also hold at least ``U_j`` items; short lists are rejected rather than
    clamping ``U_j``, which would change the sampled distribution.
    """
    c = constraints
    if c.k < 1:
        raise InfeasibleConstraints(f"k must be positive, got {c.k}", "k >= 1")
    if c.ell < 1 or len(c.upper) != c.ell:
        raise InfeasibleConstraints(
            f"lower/upper must have the same positive length, got {len(c.lower)} and {len(c.upper)}",
            "len(L) == len(U) >= 1",
        )
    for j, (lo, hi) in enumerate(zip(c.lower, c.upper)):
        if not 0 <= lo <= hi <= c.k:
            raise InfeasibleConstraints(
                f"group {j}: need 0 <= L <= U <= k, got L={lo}, U={hi}, k={c.k}",
                f"0 <= L_{j} <= U_{j} <= k",
            )
    if sum(c.lower) > c.k:
        raise InfeasibleConstraints(f"sum(L) = {sum(c.lower)} exceeds k = {c.k}", "sum(L) <= k")
    if sum(c.upper) < c.k:
        raise InfeasibleConstraints(f"sum(U) = {sum(c.upper)} is below k = {c.k}", "sum(U) >= k")
    if in_group is not None:
        if len(in_group) != c.ell:
            raise InfeasibleConstraints(
                f"expected {c.ell} in-group rankings, got {len(in_group)}", "len(in_group) == ell"
            )
        check_items(in_group)
        for j, g in enumerate(in_group):
            if len(g) < c.upper[j]:
                raise InsufficientItems(j, c.upper[j], len(g))


def check_items(in_group: Sequence[InGroupRanking]) -> None:
    seen: set[str] = set()
    for j, g in enumerate(in_group):
        if g.group != j:
            raise ValueError(f"in-group ranking at position {j} is labelled group {g.group}")
        for a in g.items:
            if a in seen:
                raise ValueError(f"item {a!r} appears more than once")
            seen.add(a)


def representation_of(y: Sequence[int], ell: int) -> GroupRepresentation:
    x = [0] * ell
    for g in y:
        if not 0 <= g < ell:
            raise ValueError(f"group index {g} outside [0, {ell})")
        x[g] += 1
    return tuple(x)


def is_group_fair(x: Sequence[int], constraints: FairnessConstraints) -> bool:
    if len(x) != constraints.ell or sum(x) != constraints.k:
        return False
    return all(lo <= v <= hi for v, lo, hi in zip(x, constraints.lower, constraints.upper))


def as_fraction(v) -> Fraction:
    """Exact rational for bound formulas; floats go through their shortest repr."""
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    return Fraction(repr(float(v)))
