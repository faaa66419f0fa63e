"""Runtime measurements: the sampler timing grid and compiled-vs-Python kernels."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .assembly import FairRankingSampler
from .dp import build_count_table
from .experiment import build_constraints
from .model import in_group_rankings
from .polytope import PolytopeGeometry, WalkConfig, compute_delta

GRID_K = (100, 1000, 10000, 20000)
GRID_ELL = (2, 5, 10)


def grid_instance(k: int, ell: int, eta: float = 0.1):
    """Equal-share instance: ``p_j = 1/ell`` with the usual ``eta`` slack."""
    return build_constraints([Fraction(1, ell)] * ell, k, eta)


def _items(c):
    return in_group_rankings([[f"g{j}-{t}" for t in range(c.upper[j])] for j in range(c.ell)])


@dataclass(frozen=True)
class Timing:
    backend: str
    k: int
    ell: int
    mean_seconds: float


def _mean_time(fn, runs):
    total = 0.0
    for r in range(runs):
        t0 = time.perf_counter()
        fn(r)
        total += time.perf_counter() - t0
    return total / runs


def time_instance(k: int, ell: int, runs: int = 5, eta: float = 0.1, tv_delta: float = 0.05) -> list[Timing]:
    """Timings for one grid cell.

    ``dp-build`` is the counting table alone; ``dp`` and ``walk`` are one
    ranking drawn from scratch (table build, or geometry plus burn-in, included).
    """
    c = grid_instance(k, ell, eta)
    items = _items(c)
    out = [
        Timing("dp-build", k, ell, _mean_time(lambda r: build_count_table(c), runs)),
        Timing("dp", k, ell, _mean_time(lambda r: FairRankingSampler(c, items, "dp", rng=r).sample(), runs)),
    ]
    if compute_delta(c) >= 1:
        cfg = WalkConfig(tv_delta=tv_delta)
        out.append(Timing("walk", k, ell, _mean_time(
            lambda r: FairRankingSampler(c, items, "walk", cfg, rng=r).sample(), runs)))
    return out


def timing_grid(ks=GRID_K, ells=GRID_ELL, runs: int = 5, progress=None) -> list[Timing]:
    rows = []
    for ell in ells:
        for k in ks:
            cell = time_instance(k, ell, runs)
            rows.extend(cell)
            if progress:
                for t in cell:
                    progress(t)
    return rows


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    lx, ly = np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float))
    return float(np.polyfit(lx, ly, 1)[0])


def compare_kernels(ell: int = 10, steps: int = 100_000, k: int = 2000, count_ell: int = 5,
                    repeats: int = 3) -> list[dict]:
    """Time each available kernel implementation on identical inputs."""
    c = grid_instance(100 * ell, ell)
    g = PolytopeGeometry.from_constraints(c)
    rng = np.random.default_rng(0)
    directions = np.ascontiguousarray(rng.standard_normal((steps, ell - 1)) @ g.basis)
    uniforms = rng.random(steps)
    cc = grid_instance(k, count_ell)
    rows = []
    for name in kernels.available():
        mod = kernels.get(name)

        def walk():
            z = np.zeros(ell)
            mod.hit_and_run(z, directions, uniforms, g.lo, g.hi, 0, np.empty((0, ell)))

        def count():
            mod.count_columns_direct(cc.k, cc.lower, cc.upper)

        for kernel, fn, size in (("hit_and_run", walk, f"ell={ell} steps={steps}"),
                                 ("count_columns_direct", count, f"k={k} ell={count_ell}")):
            best = math.inf
            for _ in range(repeats):
                t0 = time.perf_counter()
                fn()
                best = min(best, time.perf_counter() - t0)
            rows.append({"kernel": kernel, "implementation": name, "size": size, "seconds": best})
    base = {r["kernel"]: r["seconds"] for r in rows if r["implementation"] == "python"}
    for r in rows:
        r["speedup"] = base[r["kernel"]] / r["seconds"]
    return rows
