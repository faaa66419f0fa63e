"""From a group representation to a ranking.

A representation ``x`` becomes an assignment by a uniformly random
arrangement of the multiset with ``x_j`` copies of each group ``j``; items
then fill each group's ranks in in-group order.
"""
from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .dp import DPSampler
from .errors import InsufficientItems
from .model import (
    FairnessConstraints,
    GroupAssignment,
    InGroupRanking,
    Ranking,
    validate,
)
from .polytope import WalkConfig, WalkSampler
from .rng import as_generator

BACKENDS = ("dp", "walk")


def sample_assignment(x: Sequence[int], rng=None) -> GroupAssignment:
    rng = as_generator(rng)
    y = np.repeat(np.arange(len(x)), np.asarray(x, dtype=np.int64))
    rng.shuffle(y)
    return tuple(int(g) for g in y)


def assemble_ranking(y: Sequence[int], in_group: Sequence[InGroupRanking]) -> Ranking:
    """Give the t-th rank held by group j to group j's t-th best item."""
    cursor = [0] * len(in_group)
    entries = []
    for g in y:
        t = cursor[g]
        items = in_group[g].items
        if t >= len(items):
            need = sum(1 for h in y if h == g)
            raise InsufficientItems(g, need, len(items))
        entries.append((items[t], g))
        cursor[g] = t + 1
    return Ranking(tuple(entries))


def make_representation_sampler(constraints: FairnessConstraints, backend: str = "dp",
                                 config: WalkConfig | None = None, rng=None):
    if backend == "dp":
        return DPSampler(constraints, rng)
    if backend == "walk":
        return WalkSampler(constraints, config, rng)
    raise ValueError(f"backend must be one of {BACKENDS}, got {backend!r}")


class FairRankingSampler:
    """Draws rankings repeatedly for one instance, reusing the backend state."""

    def __init__(self, constraints: FairnessConstraints, in_group: Sequence[InGroupRanking],
                 backend: str = "dp", config: WalkConfig | None = None, rng=None):
        validate(constraints, in_group)
        self.constraints = constraints
        self.in_group = list(in_group)
        self.rng = as_generator(rng)
        self.backend = backend
        self.representations = make_representation_sampler(constraints, backend, config, self.rng)

    def sample(self) -> Ranking:
        x = self.representations.sample()
        return assemble_ranking(sample_assignment(x, self.rng), self.in_group)

    def sample_many(self, n: int) -> list[Ranking]:
        if self.backend == "dp":
            # same RNG consumption as n calls to sample()
            return [self.sample() for _ in range(n)]
        # the walk amortises its oracle calls over a batch
        xs = self.representations.sample_many(n)
        return [assemble_ranking(sample_assignment(x, self.rng), self.in_group) for x in xs]


def sample_fair_ranking(constraints: FairnessConstraints, in_group: Sequence[InGroupRanking],
                        backend: str = "dp", config: WalkConfig | None = None, rng=None) -> Ranking:
    """One ranking from the axiomatic fair-ranking distribution.

    ``backend="dp"`` samples it exactly; ``backend="walk"`` samples the
    representation within total variation ``config.tv_delta`` of uniform.
    """
    return FairRankingSampler(constraints, in_group, backend, config, rng).sample()


def window_count(ranking: Ranking | Sequence[int], group: int, start: int, stop: int) -> int:
    """Ranks ``start..stop`` (1-based, inclusive) assigned to ``group``."""
    y = ranking.assignment if isinstance(ranking, Ranking) else ranking
    return sum(1 for g in y[start - 1:stop] if g == group)

