"""End-to-end acceptance checks, one test per criterion.

Each test records a single PASS/FAIL line (shown in the pytest terminal
summary, or printed when this file is run as a script).  Tolerances are fixed
constants below; seeds are fixed so every run sees the same draws.
"""
from __future__ import annotations

import csv
import sys
import time
import warnings
from collections import Counter

import numpy as np
import pytest

from fairrank.assembly import FairRankingSampler
from fairrank.bench import grid_instance, loglog_slope, timing_grid
from fairrank.datasets import bundled_german_path, ingest
from fairrank.dp import DPSampler, build_count_table
from fairrank.evaluation import (
    brute_force_enumerate,
    check_rank_marginals,
    check_window_expectations,
    chi_square_uniformity,
    collect,
    histogram,
    minmax_normalize,
    ndcg_at,
    tv_distance,
    tv_distance_to_uniform,
)
from fairrank.experiment import ExperimentConfig, run_experiment
from fairrank.model import FairnessConstraints as F, in_group_rankings
from fairrank.polytope import WalkSampler, WeakAcceptanceWarning, compute_delta
from fairrank.prefix import PrefixConstraints, PrefixSampler

pytestmark = pytest.mark.slow

# pinned tolerances and budgets
COUNT_INSTANCES, COUNT_SECONDS = 200, 10.0
DP_INSTANCES, DP_SAMPLES, DP_ALPHA, DP_TV, DP_SECONDS = 20, 100_000, 0.01, 0.02, 120.0
WALK_INSTANCES, WALK_SAMPLES, WALK_TV, WALK_DELTA, WALK_SECONDS = 10, 100_000, 0.05, 0.05, 600.0
CREDIT_INSTANCE = F(100, (80, 10), (90, 20))
MARGINAL_SAMPLES, N_SE, MARGINAL_SECONDS, WINDOWS = 10_000, 3.0, 60.0, 50
ETA, CURVE_SAMPLES, FLAT_RANGE, EPSILON = 0.1, 1000, 0.1, 0.3
NDCG_HAND, NDCG_TOL = 0.6036, 1e-3
SLOPE_TARGET, SLOPE_TOL, SLOPE_ELL, SLOPE_KS = 2.0, 0.3, 10, (100, 1000, 10000)
GRID_SECONDS = 1800.0
PREFIX_SAMPLES, PREFIX_TV, PREFIX_CHECKED = 100_000, 0.02, 1000

RESULTS: list[str] = []


def report(criterion: int, passed: bool, detail: str) -> None:
    line = f"{'PASS' if passed else 'FAIL'}  criterion {criterion:2d}: {detail}"
    RESULTS.append(line)
    print(line)
    assert passed, line


def random_constraints(rng, max_k, max_ell):
    k = int(rng.integers(1, max_k + 1))
    ell = int(rng.integers(1, max_ell + 1))
    a = rng.integers(0, k + 1, size=ell)
    b = rng.integers(0, k + 1, size=ell)
    return F(k, tuple(np.minimum(a, b)), tuple(np.maximum(a, b)))


def feasible(c):
    return sum(c.lower) <= c.k <= sum(c.upper)


def test_exact_counting():
    rng = np.random.default_rng(101)
    checked = mismatches = 0
    t0 = time.perf_counter()
    while checked < COUNT_INSTANCES:
        c = random_constraints(rng, 12, 4)
        if not feasible(c):
            continue
        truth = len(brute_force_enumerate(c))
        if truth == 0:
            continue
        mismatches += build_count_table(c).total != truth
        checked += 1
    elapsed = time.perf_counter() - t0
    report(1, mismatches == 0 and elapsed < COUNT_SECONDS,
           f"{checked} instances, {mismatches} count mismatches, {elapsed:.2f}s (limit {COUNT_SECONDS}s)")


def _instances_with_points(rng, lo, hi, n, accept=lambda c: True):
    out, seen = [], set()
    while len(out) < n:
        c = random_constraints(rng, 12, 4)
        if not feasible(c) or c in seen or not accept(c):
            continue
        pts = brute_force_enumerate(c)
        if lo <= len(pts) <= hi:
            seen.add(c)
            out.append((c, pts))
    return out


def test_dp_uniformity():
    rng = np.random.default_rng(202)
    worst_tv, failures = 0.0, []
    t0 = time.perf_counter()
    for n, (c, pts) in enumerate(_instances_with_points(rng, 2, 50, DP_INSTANCES)):
        counts, outside = histogram(DPSampler(c, rng=1000 + n).sample_many(DP_SAMPLES), pts)
        tv = tv_distance_to_uniform(counts, outside)
        chi = chi_square_uniformity(counts, DP_ALPHA)
        worst_tv = max(worst_tv, tv)
        if outside or tv > DP_TV or not chi.passed:
            failures.append((c, tv, chi.p_value))
    elapsed = time.perf_counter() - t0
    report(2, not failures and elapsed < DP_SECONDS,
           f"{DP_INSTANCES} instances x {DP_SAMPLES} samples, max TV {worst_tv:.4f} (limit {DP_TV}), "
           f"chi-square failures at alpha={DP_ALPHA}: {len(failures)}, {elapsed:.1f}s")


def test_walk_uniformity_and_acceptance():
    rng = np.random.default_rng(303)
    used_ell = Counter()

    def walkable(c):
        # cap the costlier four-group instances to keep the run short
        if c.ell < 2 or compute_delta(c) < 1 or (c.ell == 4 and used_ell[4] >= 2):
            return False
        used_ell[c.ell] += 1
        return True

    worst_tv, failures, lines = 0.0, [], []
    t0 = time.perf_counter()
    for n, (c, pts) in enumerate(_instances_with_points(rng, 2, 50, WALK_INSTANCES, walkable)):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", WeakAcceptanceWarning)
            s = WalkSampler(c, rng=2000 + n)
        counts, outside = histogram(s.sample_many(WALK_SAMPLES), pts)
        tv = tv_distance_to_uniform(counts, outside)
        bound = s.geometry.acceptance_bound(WALK_DELTA)
        worst_tv = max(worst_tv, tv)
        lines.append(f"ell={c.ell} delta={s.geometry.delta} rate={s.acceptance_rate:.3f} bound={bound:.3f}")
        if tv > WALK_TV or s.acceptance_rate < bound:
            failures.append((c, tv, s.acceptance_rate, bound))
    elapsed = time.perf_counter() - t0
    report(3, not failures and elapsed < WALK_SECONDS,
           f"{WALK_INSTANCES} instances x {WALK_SAMPLES} accepted, max TV {worst_tv:.4f} (limit {WALK_TV}), "
           f"acceptance below bound: {sum(f[2] < f[3] for f in failures)}, {elapsed:.1f}s; " + "; ".join(lines))


@pytest.fixture(scope="module")
def credit_samples():
    c = CREDIT_INSTANCE
    items = in_group_rankings([[f"a{t}" for t in range(c.upper[0])], [f"b{t}" for t in range(c.upper[1])]])
    t0 = time.perf_counter()
    samples = FairRankingSampler(c, items, "dp", rng=404).sample_many(MARGINAL_SAMPLES)
    return samples, time.perf_counter() - t0


def test_rank_marginals(credit_samples):
    samples, elapsed = credit_samples
    c = CREDIT_INSTANCE
    checks = check_rank_marginals(collect(samples, c.k, c.ell), c, N_SE)
    bad = [b for b in checks if not b.passed]
    report(4, not bad and elapsed < MARGINAL_SECONDS,
           f"{len(checks) - len(bad)}/{len(checks)} rank-group frequencies within [L/k, U/k] +- {N_SE} SE, "
           f"{MARGINAL_SAMPLES} samples in {elapsed:.1f}s")


def test_window_bounds(credit_samples):
    samples, _ = credit_samples
    c = CREDIT_INSTANCE
    rng = np.random.default_rng(505)
    windows = [tuple(sorted(int(v) for v in rng.integers(1, c.k + 1, size=2))) for _ in range(WINDOWS)]
    checks = check_window_expectations(samples, c, windows, N_SE)
    bad = [b for b in checks if not b.passed]
    report(5, not bad, f"{WINDOWS} windows x {c.ell} groups: {len(checks) - len(bad)}/{len(checks)} "
                       f"expected counts within the scaled bounds +- {N_SE} SE")


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_figure_shapes(tmp_path):
    ds = ingest(bundled_german_path())
    young = ds.group_index("young")
    p_young = float(ds.proportions[young])
    cfg = ExperimentConfig(output=tmp_path / "german", lower=CREDIT_INSTANCE.lower, upper=CREDIT_INSTANCE.upper,
                           protected=("young",), samples=CURVE_SAMPLES, epsilon=EPSILON, seed=606, timing_runs=1)
    files = run_experiment(cfg)
    rep = [r for r in _read(files["representation_curve.csv"]) if r["group"] == "young"]
    rep_dev = max(abs(float(r["mean"]) - p_young) for r in rep)
    fr = _read(files["fraction_of_rankings.csv"])
    spread = {}
    for g in ds.labels:
        f = [float(r["fraction"]) for r in fr if r["group"] == g]
        spread[g] = max(f) - min(f)
    eg = np.array([float(r["fraction"]) for r in _read(files["baselines/eps_greedy/fraction_of_rankings.csv"])
                   if r["group"] == "young"])
    var_top, var_tail = float(eg[:20].var()), float(eg[80:].var())
    ok = (
        [int(r["checkpoint"]) for r in rep] == [20, 40, 60, 80, 100]
        and rep_dev <= ETA
        and max(spread.values()) <= FLAT_RANGE
        and var_top > var_tail
    )
    report(6, ok, f"max |mean share - p*| {rep_dev:.4f} (limit {ETA}); fraction-of-rankings range "
                  f"{max(spread.values()):.4f} (limit {FLAT_RANGE}); eps-greedy per-rank variance ranks 1-20 "
                  f"{var_top:.5f} vs 81-100 {var_tail:.5f}")


def test_ndcg_sanity():
    ds = ingest(bundled_german_path())
    scores = minmax_normalize(ds.scores)
    identity = sorted(scores, key=lambda a: -scores[a])[:100]
    exact = all(ndcg_at(identity, scores, i) == 1.0 for i in range(1, 101))
    hand = ndcg_at(["c", "b", "a"], {"a": 1.0, "b": 0.5, "c": 0.0}, 3)
    c = CREDIT_INSTANCE
    fair = FairRankingSampler(c, ds.in_group, "dp", rng=707).sample_many(200)
    vals = [ndcg_at(r, scores, 100) for r in fair]
    ok = exact and abs(hand - NDCG_HAND) <= NDCG_TOL and all(0 < v <= 1 for v in vals)
    report(7, ok, f"identity exact 1.0 at all cutoffs: {exact}; hand example {hand:.5f} "
                  f"(target {NDCG_HAND} +- {NDCG_TOL}); fair nDCG@100 in [{min(vals):.4f}, {max(vals):.4f}]")


def _median_build(k, ell, repeats=3):
    c = grid_instance(k, ell)
    ts = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        build_count_table(c)
        ts.append(time.perf_counter() - t0)
    return float(np.median(ts))


def test_runtime_scaling():
    builds = [_median_build(k, SLOPE_ELL) for k in SLOPE_KS]
    slope = loglog_slope(SLOPE_KS, builds)
    c = grid_instance(10000, 10)
    items = in_group_rankings([[f"{j}-{t}" for t in range(c.upper[j])] for j in range(c.ell)])
    t0 = time.perf_counter()
    FairRankingSampler(c, items, "walk", rng=808).sample()
    walk_one = time.perf_counter() - t0
    t0 = time.perf_counter()
    grid = timing_grid()
    grid_elapsed = time.perf_counter() - t0
    dp_build = next(t.mean_seconds for t in grid if (t.backend, t.k, t.ell) == ("dp-build", 10000, 10))
    walk_grid = next(t.mean_seconds for t in grid if (t.backend, t.k, t.ell) == ("walk", 10000, 10))
    ok = (abs(slope - SLOPE_TARGET) <= SLOPE_TOL and walk_one < builds[-1] and walk_grid < dp_build
          and grid_elapsed < GRID_SECONDS)
    report(8, ok, f"dp build slope {slope:.3f} at ell={SLOPE_ELL} over k={SLOPE_KS} "
                  f"(target {SLOPE_TARGET} +- {SLOPE_TOL}); k=10000 ell=10 walk sample {walk_one:.3f}s "
                  f"(grid mean {walk_grid:.3f}s) vs dp build {builds[-1]:.3f}s (grid mean {dp_build:.3f}s); "
                  f"full grid {grid_elapsed:.0f}s (limit {GRID_SECONDS:.0f}s)")


def test_prefix_heuristic():
    c = F(4, (1, 1), (3, 3))
    items = in_group_rankings([["a0", "a1", "a2"], ["b0", "b1", "b2"]])
    flat = Counter(r.assignment for r in FairRankingSampler(c, items, "dp", rng=909).sample_many(PREFIX_SAMPLES))
    pre = Counter(r.assignment for r in
                  PrefixSampler(PrefixConstraints.from_flat(c), items, "dp", rng=910).sample_many(PREFIX_SAMPLES))
    keys = sorted(set(flat) | set(pre))
    tv = tv_distance([flat[y] for y in keys], [pre[y] for y in keys])
    ds = ingest(bundled_german_path())
    pc = PrefixConstraints.from_proportions(ds.proportions, 100, ETA, 50)
    samples = PrefixSampler(pc, ds.in_group, "dp", rng=911).sample_many(PREFIX_CHECKED)
    satisfied = sum(pc.satisfied_by(r.assignment) for r in samples)
    report(9, tv <= PREFIX_TV and satisfied == PREFIX_CHECKED and len(pc.checkpoints) == 2,
           f"single-checkpoint vs flat TV {tv:.4f} over {len(keys)} assignments (limit {PREFIX_TV}); "
           f"checkpoints {pc.checkpoints}: {satisfied}/{PREFIX_CHECKED} rankings satisfy both")


def test_determinism(tmp_path):
    identical, compared = True, 0
    for backend in ("dp", "walk"):
        runs = []
        for name in ("first", "second"):
            cfg = ExperimentConfig(output=tmp_path / backend / name, backend=backend, samples=300, seed=1010,
                                   prefix_block=50 if backend == "walk" else None, timing_runs=1)
            runs.append(run_experiment(cfg))
        for rel, path in runs[0].items():
            if rel.endswith(".csv") and rel != "timing.csv":
                compared += 1
                identical &= path.read_bytes() == runs[1][rel].read_bytes()
    report(10, identical and compared > 0, f"{compared} CSV files byte-identical across repeated runs "
                                           f"(dp and walk backends; timing.csv excluded)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
