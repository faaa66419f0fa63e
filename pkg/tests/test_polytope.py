import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from fairrank.errors import DeltaTooSmall, RejectionBudgetExceeded
from fairrank.evaluation import brute_force_enumerate, histogram, tv_distance_to_uniform
from fairrank.model import FairnessConstraints as F, is_group_fair
from fairrank.polytope import (
    PolytopeGeometry,
    WalkConfig,
    WalkSampler,
    WeakAcceptanceWarning,
    build_rotation,
    compute_delta,
    continuous_uniform_sample,
    find_center,
    round_to_lattice,
)


@pytest.mark.parametrize("c,delta", [
    (F(6, (0, 0, 0), (4, 4, 4)), 2),
    (F(100, (80, 10), (90, 20)), 5),
    (F(5, (2, 3), (2, 3)), 0),
])
def test_compute_delta(c, delta):
    assert compute_delta(c) == delta


@pytest.mark.parametrize("c,center", [
    (F(6, (0, 0, 0), (4, 4, 4)), (2, 2, 2)),
    (F(100, (80, 10), (90, 20)), (85, 15)),
    (F(10, (0, 0), (10, 10)), (5, 5)),
])
def test_find_center(c, center):
    assert find_center(c, compute_delta(c)) == center


def test_find_center_fills_up_to_k():
    c = F(10, (0, 0, 0), (8, 3, 9))
    d = compute_delta(c)
    x = find_center(c, d)
    assert sum(x) == 10
    assert all(lo + d <= v <= hi - d for v, lo, hi in zip(x, c.lower, c.upper))


def test_find_center_needs_delta():
    with pytest.raises(DeltaTooSmall):
        find_center(F(2, (1, 1), (1, 1)), 0)


def test_rotation_two_groups():
    R = build_rotation(2)
    np.testing.assert_allclose(R @ (np.ones(2) / math.sqrt(2)), [0, 1], atol=1e-12)
    v = R @ (np.array([1.0, -1.0]) / math.sqrt(2))
    assert abs(v[1]) < 1e-12


@pytest.mark.parametrize("ell", [2, 3, 5, 10, 50])
def test_rotation_is_orthogonal_and_maps_diagonal(ell):
    R = build_rotation(ell)
    np.testing.assert_allclose(R @ R.T, np.eye(ell), atol=1e-12)
    e = np.zeros(ell)
    e[-1] = 1
    np.testing.assert_allclose(R @ (np.ones(ell) / math.sqrt(ell)), e, atol=1e-12)
    np.testing.assert_allclose(R[:-1].sum(axis=1), 0, atol=1e-12)


@pytest.mark.parametrize("z,x", [
    ((0.4, -0.4), (1, -1)),
    ((2.0, -2.0), (2, -2)),
    ((0.5, 0.5, -1.0), (1, 0, -1)),
])
def test_rounding_examples(z, x):
    assert tuple(round_to_lattice(z)) == x


@given(arrays(np.float64, st.integers(2, 8), elements=st.floats(-50, 50)))
def test_rounding_keeps_zero_sum_and_is_within_one(v):
    z = v - v.mean()
    if abs(z.sum()) > 1e-9:
        return
    z[-1] = -z[:-1].sum()
    x = round_to_lattice(z)
    assert x.sum() == 0
    assert np.all(np.abs(x - z) < 1 + 1e-9)


def test_geometry_box_scaled():
    g = PolytopeGeometry.from_constraints(F(100, (80, 10), (90, 20)))
    s = 1 + math.sqrt(2) / 5
    assert g.expansion == pytest.approx(s)
    np.testing.assert_allclose(g.lo, [-5 * s, -5 * s])
    np.testing.assert_allclose(g.hi, [5 * s, 5 * s])
    assert g.in_translated((1, -1)) and not g.in_translated((6, -6)) and not g.in_translated((1, 0))


def test_walk_rejects_tiny_delta():
    with pytest.raises(DeltaTooSmall):
        WalkSampler(F(2, (1, 1), (1, 1)))


def test_walk_needs_two_groups():
    with pytest.raises(ValueError):
        WalkSampler(F(5, (0,), (5,)))


@pytest.mark.parametrize("tv", [0.0, 0.2, -1.0])
def test_walk_config_rejects_bad_delta(tv):
    with pytest.raises(ValueError):
        WalkConfig(tv_delta=tv)


def test_walk_config_defaults():
    g = PolytopeGeometry.from_constraints(F(30, (0, 0, 0), (30, 30, 30)))
    steps, burn, budget = WalkConfig().resolve(g)
    assert (steps, burn) == (400, 2000)
    assert 100 <= budget <= 10**6


def test_walk_tv_small_instance():
    c = F(3, (0, 0), (3, 3))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", WeakAcceptanceWarning)
        s = WalkSampler(c, rng=11)
    samples = s.sample_many(100_000)
    counts, outside = histogram(samples, brute_force_enumerate(c))
    assert outside == 0
    assert tv_distance_to_uniform(counts) <= 0.05


def test_weak_bound_warns():
    with pytest.warns(WeakAcceptanceWarning):
        WalkSampler(F(3, (0, 0), (3, 3)), rng=0)


def test_walk_samples_are_fair_and_reproducible():
    c = F(60, (10, 10, 10, 10), (20, 20, 20, 20))
    a = WalkSampler(c, rng=5).sample_many(200)
    b = WalkSampler(c, rng=5).sample_many(200)
    assert a == b
    assert all(is_group_fair(x, c) for x in a)


def test_continuous_points_in_expanded_polytope():
    g = PolytopeGeometry.from_constraints(F(40, (5, 5, 5), (20, 20, 20)))
    Z = continuous_uniform_sample(g, rng=2, size=500)
    assert Z.shape == (500, 3)
    assert all(g.in_expanded(z) for z in Z)


def test_continuous_marginal_is_uniform_for_two_groups():
    # with two groups the expanded polytope is a segment; its first coordinate is uniform
    g = PolytopeGeometry.from_constraints(F(100, (80, 10), (90, 20)))
    Z = continuous_uniform_sample(g, WalkConfig(step_count=5), rng=3, size=20_000)
    u = (Z[:, 0] - g.lo[0]) / (g.hi[0] - g.lo[0])
    assert np.histogram(u, bins=10, range=(0, 1))[0].min() > 1800


def test_rejection_budget():
    s = WalkSampler(F(100, (80, 10), (90, 20)), WalkConfig(max_rejections=1), rng=0)
    with pytest.raises(RejectionBudgetExceeded):
        for _ in range(1000):
            s.sample()


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**31))
def test_acceptance_rate_positive(ell, seed):
    c = F(10 * ell, (2,) * ell, (18,) * ell)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", WeakAcceptanceWarning)
        s = WalkSampler(c, WalkConfig(step_count=20), rng=seed)
    xs = s.sample_many(20)
    assert all(is_group_fair(x, c) for x in xs)
    assert 0 < s.acceptance_rate <= 1
