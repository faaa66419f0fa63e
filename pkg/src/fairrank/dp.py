"""Exact uniform sampling of group-fair representations by counting.

``D[kp][i]`` counts integer vectors ``(x_1..x_i)`` with ``L_h <= x_h <= U_h``
summing to ``kp``.  Sampling walks groups from the last to the first and picks
``x_i`` with probability ``D[kp - x_i][i-1] / D[kp][i]``; the product
telescopes to ``1 / D[k][ell]`` for every feasible vector.

Counts are Python ints, and the categorical draws compare a uniform big
integer against running sums, so no floating point enters the sampler.
"""
from __future__ import annotations

from dataclasses import dataclass

from . import kernels
from .errors import InfeasibleConstraints, NoFeasiblePoint
from .model import FairnessConstraints, GroupRepresentation, validate
from .rng import as_generator, randbelow


@dataclass(frozen=True, eq=False)
class CountTable:
    constraints: FairnessConstraints
    columns: tuple[tuple[int, ...], ...]  # columns[i][kp] == D[kp][i]

    def __getitem__(self, index):
        kp, i = index
        if kp < 0:
            return 0
        return self.columns[i][kp]

    @property
    def total(self) -> int:
        c = self.constraints
        return self.columns[c.ell][c.k]

    def as_rows(self):
        """The table as ``(k+1) x (ell+1)`` nested lists, ``rows[kp][i]``."""
        return [list(r) for r in zip(*self.columns)]


def build_count_table(constraints: FairnessConstraints, method: str = "direct") -> CountTable:
    """Fill the counting table.

    ``method="direct"`` sums every window explicitly, O(k^2 ell) additions,
    and runs on the compiled kernel when available.  ``method="prefix"``
    uses running prefix sums for O(k ell); it gives identical counts and is
    the practical choice for very large ``k`` and ``ell``.
    """
    validate(constraints)
    k, lower, upper = constraints.k, constraints.lower, constraints.upper
    if method == "direct":
        cols = kernels.count_columns_direct(k, lower, upper)
    elif method == "prefix":
        cols = _count_columns_prefix(k, lower, upper)
    else:
        raise ValueError(f"unknown method {method!r}")
    table = CountTable(constraints, tuple(tuple(c) for c in cols))
    if table.total == 0:
        raise InfeasibleConstraints("no group-fair representation exists", "D[k][ell] > 0")
    return table


def _count_columns_prefix(k, lower, upper):
    prev = [1] + [0] * k
    cols = [prev]
    for L, U in zip(lower, upper):
        cum = [0] * (k + 2)  # cum[t+1] = prev[0] + ... + prev[t]
        for t in range(k + 1):
            cum[t + 1] = cum[t] + prev[t]
        col = [0] * (k + 1)
        for kp in range(L, k + 1):
            col[kp] = cum[kp - L + 1] - cum[max(0, kp - U)]
        cols.append(col)
        prev = col
    return cols


def count_fair_representations(constraints: FairnessConstraints, method: str = "prefix") -> int:
    return build_count_table(constraints, method).total


def sample_representation(table: CountTable, rng=None) -> GroupRepresentation:
    total = table.total
    if total == 0:
        raise NoFeasiblePoint("the constraint polytope has no lattice points")
    rng = as_generator(rng)
    c = table.constraints
    x = [0] * c.ell
    kp = c.k
    for i in range(c.ell, 0, -1):
        lo, hi = c.lower[i - 1], min(c.upper[i - 1], kp)
        r = randbelow(rng, table[kp, i])
        prev = table.columns[i - 1]
        for v in range(lo, hi + 1):
            w = prev[kp - v]
            if r < w:
                break
            r -= w
        else:  # pragma: no cover - unreachable for a consistent table
            raise NoFeasiblePoint("categorical draw ran past its support")
        x[i - 1] = v
        kp -= v
    return tuple(x)


class DPSampler:
    """Reusable exact sampler: the table is built once, draws are O(k ell)."""

    def __init__(self, constraints: FairnessConstraints, rng=None, method: str = "direct"):
        self.constraints = constraints
        self.table = build_count_table(constraints, method)
        self.rng = as_generator(rng)

    @property
    def count(self) -> int:
        return self.table.total

    def sample(self) -> GroupRepresentation:
        return sample_representation(self.table, self.rng)

    def sample_many(self, n: int) -> list[GroupRepresentation]:
        return [sample_representation(self.table, self.rng) for _ in range(n)]
