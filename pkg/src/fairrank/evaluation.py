"""Oracles, statistical checks and ranking metrics.

The brute-force enumerator here deliberately shares nothing with the
counting table in :mod:`fairrank.dp`; tests cross-check one against the other.
Statistical pass/fail decisions use ``n_se`` binomial (or sample) standard
errors, 3 by default.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .assembly import assemble_ranking
from .errors import InstanceTooLarge, MissingScore, TooFewSamples
from .model import FairnessConstraints, InGroupRanking, Ranking
from .rng import as_generator

ENUMERATION_LIMIT = 10**7


# -- brute force ------------------------------------------------------------

def brute_force_enumerate(constraints: FairnessConstraints, limit: int = ENUMERATION_LIMIT) -> list[tuple[int, ...]]:
    """All lattice points of the constraint polytope, lexicographically sorted."""
    c = constraints
    ranges = [range(lo, hi + 1) for lo, hi in zip(c.lower, c.upper)]
    size = math.prod(len(r) for r in ranges)
    if size > limit:
        raise InstanceTooLarge(f"box has {size} points, limit is {limit}")
    return [x for x in itertools.product(*ranges) if sum(x) == c.k]


def histogram(samples: Iterable[Sequence[int]], support: Sequence[tuple[int, ...]]) -> tuple[np.ndarray, int]:
    """Counts of each support point and the number of samples outside it."""
    index = {tuple(p): n for n, p in enumerate(support)}
    counts = np.zeros(len(support), dtype=np.int64)
    outside = 0
    for s in samples:
        n = index.get(tuple(s))
        if n is None:
            outside += 1
        else:
            counts[n] += 1
    return counts, outside


def tv_distance_to_uniform(hist: Sequence[float], outside: float = 0) -> float:
    """Total variation distance between a histogram and uniform on its cells.

    ``hist`` may hold counts or probabilities; ``outside`` is mass that fell
    off the support and counts fully toward the distance.
    """
    h = np.asarray(hist, dtype=float)
    if h.size == 0:
        raise ValueError("empty support")
    total = h.sum() + outside
    p = h / total
    return 0.5 * (float(np.abs(p - 1.0 / h.size).sum()) + outside / total)


def tv_distance(p: Sequence[float], q: Sequence[float]) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return 0.5 * float(np.abs(p / p.sum() - q / q.sum()).sum())


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    dof: int
    critical: float
    p_value: float
    alpha: float

    @property
    def passed(self) -> bool:
        return self.statistic <= self.critical


def chi_square_uniformity(counts: Sequence[int], alpha: float = 0.01) -> ChiSquareResult:
    """Pearson goodness-of-fit of ``counts`` against the uniform distribution."""
    obs = np.asarray(counts, dtype=float)
    n = obs.sum()
    cells = obs.size
    expected = n / cells if cells else 0.0
    if cells < 2 or expected < 5:
        raise TooFewSamples(f"need >= 5 expected counts per cell over >= 2 cells, got {expected:.2f}")
    stat = float(((obs - expected) ** 2).sum() / expected)
    dof = cells - 1
    return ChiSquareResult(stat, dof, float(stats.chi2.ppf(1 - alpha, dof)), float(stats.chi2.sf(stat, dof)), alpha)


# -- sample statistics --------------------------------------------------------

@dataclass
class SampleStatistics:
    """Mergeable running statistics over sampled assignments.

    ``rank_counts[i, j]`` counts samples with rank ``i+1`` in group ``j``;
    ``prefix_sum``/``prefix_sq`` accumulate the top-``i`` group fraction at
    each checkpoint for mean and standard deviation.
    """

    k: int
    ell: int
    checkpoints: tuple[int, ...] = ()
    n: int = 0
    rank_counts: np.ndarray = field(default=None)
    prefix_sum: np.ndarray = field(default=None)
    prefix_sq: np.ndarray = field(default=None)
    representations: Counter = field(default_factory=Counter)

    def __post_init__(self):
        self.checkpoints = tuple(self.checkpoints)
        if self.rank_counts is None:
            self.rank_counts = np.zeros((self.k, self.ell), dtype=np.int64)
        if self.prefix_sum is None:
            self.prefix_sum = np.zeros((len(self.checkpoints), self.ell))
        if self.prefix_sq is None:
            self.prefix_sq = np.zeros((len(self.checkpoints), self.ell))

    def add(self, ranking: Ranking | Sequence[int]) -> None:
        y = np.asarray(ranking.assignment if isinstance(ranking, Ranking) else ranking, dtype=np.int64)
        onehot = np.zeros((self.k, self.ell), dtype=np.int64)
        onehot[np.arange(self.k), y] = 1
        self.rank_counts += onehot
        if self.checkpoints:
            cum = np.cumsum(onehot, axis=0)
            idx = np.asarray(self.checkpoints) - 1
            frac = cum[idx] / np.asarray(self.checkpoints, dtype=float)[:, None]
            self.prefix_sum += frac
            self.prefix_sq += frac * frac
        self.representations[tuple(int(v) for v in onehot.sum(axis=0))] += 1
        self.n += 1

    def merge(self, other: SampleStatistics) -> SampleStatistics:
        if (self.k, self.ell, self.checkpoints) != (other.k, other.ell, other.checkpoints):
            raise ValueError("cannot merge statistics over different shapes")
        return SampleStatistics(
            self.k, self.ell, self.checkpoints, self.n + other.n,
            self.rank_counts + other.rank_counts,
            self.prefix_sum + other.prefix_sum,
            self.prefix_sq + other.prefix_sq,
            self.representations + other.representations,
        )

    @property
    def frequencies(self) -> np.ndarray:
        """``k x ell`` empirical ``Pr[rank i -> group j]``; rows sum to 1."""
        return self.rank_counts / max(self.n, 1)

    def representation_mean(self) -> np.ndarray:
        return self.prefix_sum / max(self.n, 1)

    def representation_std(self) -> np.ndarray:
        mean = self.representation_mean()
        var = self.prefix_sq / max(self.n, 1) - mean * mean
        return np.sqrt(np.clip(var, 0.0, None))


def collect(samples: Iterable[Ranking], k: int, ell: int, checkpoints: Sequence[int] = ()) -> SampleStatistics:
    st = SampleStatistics(k, ell, tuple(checkpoints))
    for s in samples:
        st.add(s)
    return st


def representation_curve(samples: Sequence[Ranking], group: int, checkpoints: Sequence[int]):
    """Mean and std across samples of the fraction of top-``i`` ranks held by ``group``."""
    if not samples:
        raise ValueError("no samples")
    Y = np.asarray([s.assignment for s in samples])
    cum = np.cumsum(Y == group, axis=1)
    idx = np.asarray(checkpoints) - 1
    frac = cum[:, idx] / np.asarray(checkpoints, dtype=float)
    return frac.mean(axis=0), frac.std(axis=0)


def fraction_of_rankings(samples: Sequence[Ranking], rank: int, group: int) -> float:
    """Fraction of samples that give rank ``rank`` (1-based) to ``group``."""
    if not samples:
        raise ValueError("no samples")
    return sum(1 for s in samples if s.entries[rank - 1][1] == group) / len(samples)


def binomial_se(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


@dataclass(frozen=True)
class BoundCheck:
    """Outcome of an interval check on an estimated quantity."""

    label: str
    estimate: float
    lower: float
    upper: float
    se: float
    n_se: float

    @property
    def passed(self) -> bool:
        slack = self.n_se * self.se
        return self.lower - slack - 1e-12 <= self.estimate <= self.upper + slack + 1e-12


def check_rank_marginals(stats_: SampleStatistics, constraints: FairnessConstraints, n_se: float = 3.0) -> list[BoundCheck]:
    """Per-rank ``L_j/k <= Pr[Y_i = j] <= U_j/k`` within ``n_se`` standard errors."""
    k = constraints.k
    freq = stats_.frequencies
    out = []
    for i in range(k):
        for j in range(constraints.ell):
            p = float(freq[i, j])
            out.append(BoundCheck(f"rank {i + 1} group {j}", p, constraints.lower[j] / k,
                                  constraints.upper[j] / k, binomial_se(p, stats_.n), n_se))
    return out


def check_window_expectations(samples: Sequence[Ranking], constraints: FairnessConstraints,
                              windows: Sequence[tuple[int, int]], n_se: float = 3.0) -> list[BoundCheck]:
    """Expected ranks held by each group in ranks ``i..i'`` against the
    window-scaled bounds ``(i'-i+1) L_j / k`` and ``(i'-i+1) U_j / k``."""
    Y = np.asarray([s.assignment for s in samples])
    n = len(samples)
    k = constraints.k
    out = []
    for i, i2 in windows:
        width = i2 - i + 1
        for j in range(constraints.ell):
            z = (Y[:, i - 1:i2] == j).sum(axis=1)
            se = float(z.std(ddof=1)) / math.sqrt(n) if n > 1 else 0.0
            out.append(BoundCheck(f"ranks {i}..{i2} group {j}", float(z.mean()),
                                  width * constraints.lower[j] / k, width * constraints.upper[j] / k, se, n_se))
    return out


# -- utility metric -----------------------------------------------------------

def minmax_normalize(scores: Mapping[str, float]) -> dict[str, float]:
    """Rescale scores to ``[0, 1]``; a constant score map becomes all zeros."""
    vals = list(scores.values())
    lo, hi = min(vals), max(vals)
    span = hi - lo
    if span == 0:
        return {a: 0.0 for a in scores}
    return {a: (s - lo) / span for a, s in scores.items()}


def _dcg(values: Sequence[float]) -> float:
    return sum((2.0 ** s - 1.0) / math.log2(r + 2) for r, s in enumerate(values))


def ndcg_at(ranking: Ranking | Sequence[str], scores: Mapping[str, float], i: int) -> float:
    """nDCG of the top ``i`` ranks against the score-sorted ranking of all items.

    ``scores`` should already be normalised to ``[0, 1]``.  When the ideal gain
    is zero (all scores zero) the ranking is as good as any and 1.0 is returned.
    """
    items = ranking.items if isinstance(ranking, Ranking) else tuple(ranking)
    if not 1 <= i <= len(items):
        raise ValueError(f"cutoff {i} outside 1..{len(items)}")
    try:
        got = [scores[a] for a in items[:i]]
    except KeyError as e:
        raise MissingScore(e.args[0]) from None
    ideal = _dcg(sorted(scores.values(), reverse=True)[:i])
    if ideal == 0:
        return 1.0
    return _dcg(got) / ideal


# -- baseline -----------------------------------------------------------------

def fair_epsilon_greedy(constraints: FairnessConstraints, epsilon: float, in_group: Sequence[InGroupRanking],
                        rng=None, primary: int = 0) -> Ranking:
    """Randomised greedy baseline that only uses the lower bounds.

    At rank ``r`` it picks a uniformly random group with probability
    ``epsilon``.  Otherwise, with two groups, it picks ``primary`` while that
    group holds fewer than ``L_primary * r / k`` of the ranks above ``r`` and
    the other group after that.  With more groups (a heuristic extension) it
    picks the group with the largest deficit ``L_j r / k - count_j``, lowest
    index on ties.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    rng = as_generator(rng)
    k, ell, L = constraints.k, constraints.ell, constraints.lower
    counts = [0] * ell
    y = []
    for r in range(1, k + 1):
        if rng.random() < epsilon:
            g = int(rng.integers(ell))
        elif ell == 2:
            g = primary if counts[primary] * k < L[primary] * r else 1 - primary
        else:
            g = max(range(ell), key=lambda j: (L[j] * r - counts[j] * k, -j))
        counts[g] += 1
        y.append(g)
    return assemble_ranking(y, in_group)
