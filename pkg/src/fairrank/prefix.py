"""Block-wise heuristic sampler for prefix fairness constraints.

Bounds are given at checkpoints ``M`` (ranks ``i`` with ``k`` in ``M``).
The ranking is built one block at a time: ranks ``i+1..i'`` between
consecutive checkpoints get a representation sampled from the block
polytope implied by the counts ``w`` already realised in the top ``i``, then
a uniform arrangement of it.  This is a heuristic; it is not the unique
axiomatic distribution, and a realised prefix can leave a later block empty.
"""
from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

from .assembly import assemble_ranking, sample_assignment
from .dp import DPSampler
from .errors import BlockInfeasible, InfeasibleConstraints, InsufficientItems
from .model import FairnessConstraints, InGroupRanking, Ranking, as_fraction, check_items
from .polytope import WalkConfig, WalkSampler, compute_delta
from .rng import as_generator

MAX_BLOCK_RETRIES = 20
MAX_RESTARTS = 100


@dataclass(frozen=True)
class PrefixConstraints:
    k: int
    checkpoints: tuple[int, ...]
    lower: Mapping[int, tuple[int, ...]]
    upper: Mapping[int, tuple[int, ...]]

    def __post_init__(self):
        object.__setattr__(self, "checkpoints", tuple(sorted(set(int(i) for i in self.checkpoints))))
        object.__setattr__(self, "lower", {int(i): tuple(int(v) for v in b) for i, b in self.lower.items()})
        object.__setattr__(self, "upper", {int(i): tuple(int(v) for v in b) for i, b in self.upper.items()})

    @property
    def ell(self) -> int:
        return len(self.lower[self.k])

    def validate(self) -> None:
        if not self.checkpoints or self.checkpoints[-1] != self.k or self.checkpoints[0] < 1:
            raise InfeasibleConstraints("checkpoints must lie in [1, k] and include k", "k in M")
        ell = self.ell
        for i in self.checkpoints:
            lo, hi = self.lower.get(i), self.upper.get(i)
            if lo is None or hi is None or len(lo) != ell or len(hi) != ell:
                raise InfeasibleConstraints(f"checkpoint {i} needs {ell} lower and upper bounds")
            for j in range(ell):
                if not 0 <= lo[j] <= hi[j] <= i:
                    raise InfeasibleConstraints(
                        f"checkpoint {i}, group {j}: need 0 <= L <= U <= {i}, got {lo[j]}, {hi[j]}",
                        f"0 <= L_{i},{j} <= U_{i},{j} <= {i}",
                    )
            if sum(lo) > i or sum(hi) < i:
                raise InfeasibleConstraints(
                    f"checkpoint {i}: need sum(L) <= {i} <= sum(U)", f"sum(L_{i}) <= {i} <= sum(U_{i})"
                )

    @classmethod
    def from_flat(cls, constraints: FairnessConstraints) -> PrefixConstraints:
        k = constraints.k
        return cls(k, (k,), {k: constraints.lower}, {k: constraints.upper})

    @classmethod
    def from_proportions(cls, proportions: Sequence[float], k: int, eta: float, block: int) -> PrefixConstraints:
        """Checkpoints every ``block`` ranks (plus ``k``) with slack that widens
        toward the end of the ranking.

        At checkpoint ``i`` the slack is ``eta * b / max(b, k - i)`` around
        ``p_j``, and bounds are scaled by the prefix length ``i``:
        ``L = ceil((p_j - slack) i)``, ``U = floor((p_j + slack) i)``, clamped
        to ``[0, i]``.
        """
        if block < 1:
            raise ValueError("block must be positive")
        p = [as_fraction(v) for v in proportions]
        e = as_fraction(eta)
        checkpoints = sorted(set(range(block, k + 1, block)) | {k})
        lower, upper = {}, {}
        for i in checkpoints:
            slack = e * block / max(block, k - i)
            lower[i] = tuple(min(i, max(0, math.ceil((pj - slack) * i))) for pj in p)
            upper[i] = tuple(min(i, max(0, math.floor((pj + slack) * i))) for pj in p)
        return cls(k, tuple(checkpoints), lower, upper)

    def satisfied_by(self, y: Sequence[int]) -> bool:
        ell = self.ell
        counts = [0] * ell
        pos = 0
        for i in self.checkpoints:
            for g in y[pos:i]:
                counts[g] += 1
            pos = i
            if any(not self.lower[i][j] <= counts[j] <= self.upper[i][j] for j in range(ell)):
                return False
        return len(y) == self.k


class PrefixSampler:
    """Reusable prefix sampler; per-block samplers are cached by block bounds.

    Dead ends are handled by redrawing the block before the one that came up
    empty, up to ``MAX_BLOCK_RETRIES`` times at that position, then
    restarting from rank 1; after ``MAX_RESTARTS`` restarts the last failing
    checkpoint is reported as :class:`BlockInfeasible`.
    """

    def __init__(self, pc: PrefixConstraints, in_group: Sequence[InGroupRanking], backend: str = "dp",
                 config: WalkConfig | None = None, rng=None):
        pc.validate()
        check_items(in_group)
        if len(in_group) != pc.ell:
            raise InfeasibleConstraints(f"expected {pc.ell} in-group rankings, got {len(in_group)}")
        for j, g in enumerate(in_group):
            if len(g) < pc.upper[pc.k][j]:
                raise InsufficientItems(j, pc.upper[pc.k][j], len(g))
        if backend not in ("dp", "walk"):
            raise ValueError(f"unknown backend {backend!r}")
        self.pc = pc
        self.in_group = list(in_group)
        self.backend = backend
        self.config = config
        self.rng = as_generator(rng)
        self._samplers: dict = {}
        self.restarts = 0

    def _block_bounds(self, start: int, stop: int, w: Sequence[int]):
        n = stop - start
        lo = tuple(max(0, L - wj) for L, wj in zip(self.pc.lower[stop], w))
        hi = tuple(min(n, U - wj) for U, wj in zip(self.pc.upper[stop], w))
        if any(a > b for a, b in zip(lo, hi)) or sum(lo) > n or sum(hi) < n:
            return None
        return FairnessConstraints(n, lo, hi)

    def _block_sampler(self, c: FairnessConstraints):
        key = (c.k, c.lower, c.upper)
        s = self._samplers.get(key)
        if s is None:
            if self.backend == "walk" and c.ell >= 2 and compute_delta(c) >= 1:
                s = WalkSampler(c, self.config, self.rng)
            else:
                s = DPSampler(c, self.rng)
            self._samplers[key] = s
        return s

    def sample_assignment(self):
        pc = self.pc
        ell = pc.ell
        bounds = (0,) + pc.checkpoints
        nblocks = len(pc.checkpoints)
        failing = pc.checkpoints[0]
        for _ in range(MAX_RESTARTS + 1):
            blocks: list[tuple[int, ...]] = []
            retries = [0] * nblocks
            while len(blocks) < nblocks:
                b = len(blocks)
                w = [0] * ell
                for blk in blocks:
                    for g in blk:
                        w[g] += 1
                c = self._block_bounds(bounds[b], bounds[b + 1], w)
                if c is None:
                    failing = bounds[b + 1]
                    if b == 0 or retries[b] >= MAX_BLOCK_RETRIES:
                        break
                    retries[b] += 1
                    blocks.pop()
                    continue
                x = self._block_sampler(c).sample()
                blocks.append(sample_assignment(x, self.rng))
            else:
                return tuple(g for blk in blocks for g in blk)
            if len(blocks) == 0 and failing == pc.checkpoints[0]:
                raise BlockInfeasible(failing)
            self.restarts += 1
        raise BlockInfeasible(failing, f"gave up after {MAX_RESTARTS} restarts at checkpoint {failing}")

    def sample(self) -> Ranking:
        return assemble_ranking(self.sample_assignment(), self.in_group)

    def sample_many(self, n: int) -> list[Ranking]:
        return [self.sample() for _ in range(n)]


def sample_prefix_fair_ranking(pc: PrefixConstraints, in_group: Sequence[InGroupRanking], backend: str = "dp",
                               config: WalkConfig | None = None, rng=None) -> Ranking:
    return PrefixSampler(pc, in_group, backend, config, rng).sample()
