"""Constraint construction, experiment configuration and plot-ready CSV output."""
from __future__ import annotations

import csv
import json
import math
import time
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .assembly import FairRankingSampler
from .datasets import Dataset, bundled_german_path, ingest
from .errors import FairRankError, ParseError
from .evaluation import fair_epsilon_greedy, minmax_normalize, ndcg_at
from .model import FairnessConstraints, Ranking, as_fraction, is_group_fair, representation_of, validate
from .polytope import WalkConfig, compute_delta
from .prefix import PrefixConstraints, PrefixSampler
from .rng import stream

CHUNK = 100  # samples per RNG stream
_BASELINE_STREAM_OFFSET = 1 << 20


def build_constraints(proportions: Sequence, k: int, eta: float) -> FairnessConstraints:
    """``L_j = ceil((p_j - eta) k)``, ``U_j = floor((p_j + eta) k)``, clamped to ``[0, k]``.

    Arithmetic is exact, so e.g. ``p = 0.85, eta = 0.1, k = 100`` gives 75, not 76.
    """
    if not 0 <= as_fraction(eta) < 1:
        raise ValueError("eta must lie in [0, 1)")
    e = as_fraction(eta)
    p = [as_fraction(v) for v in proportions]
    lower = tuple(min(k, max(0, math.ceil((pj - e) * k))) for pj in p)
    upper = tuple(min(k, max(0, math.floor((pj + e) * k))) for pj in p)
    c = FairnessConstraints(k, lower, upper)
    validate(c)
    return c


@dataclass
class ExperimentConfig:
    output: Path = Path("results")
    dataset: Path | None = None  # None: bundled synthetic credit data
    id_column: str = "id"
    group_column: str = "group"
    score_column: str = "score"
    protected: tuple[str, ...] = ()
    k: int = 100
    eta: float = 0.1
    lower: tuple[int, ...] | None = None  # per group, labels in sorted order
    upper: tuple[int, ...] | None = None
    prefix_block: int | None = None
    checkpoints: tuple[int, ...] | None = None
    backend: str = "dp"
    samples: int = 1000
    seed: int = 0
    tv_delta: float = 0.05
    epsilon: float | None = 0.3
    baseline_csv: Path | None = None
    timing_runs: int = 5
    workers: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        if not 0 <= self.eta < 1:
            raise ValueError("eta must lie in [0, 1)")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.backend not in ("dp", "walk"):
            raise ValueError(f"backend must be dp or walk, got {self.backend!r}")
        if (self.lower is None) != (self.upper is None):
            raise ValueError("lower and upper overrides go together")

    def resolved_checkpoints(self) -> tuple[int, ...]:
        if self.checkpoints:
            return tuple(self.checkpoints)
        step = max(1, self.k // 5)
        return tuple(sorted(set(range(step, self.k + 1, step)) | {self.k}))

    def echo(self) -> dict:
        d = asdict(self)
        return {key: (str(v) if isinstance(v, Path) else list(v) if isinstance(v, tuple) else v)
                for key, v in d.items()}


def _ints(text):
    return tuple(int(t) for t in text.replace(",", " ").split())


_PARSERS = {
    "output": Path, "dataset": Path, "baseline_csv": Path,
    "id_column": str, "group_column": str, "score_column": str,
    "protected": lambda s: tuple(t.strip() for t in s.split(",") if t.strip()),
    "k": int, "eta": float, "lower": _ints, "upper": _ints, "prefix_block": int,
    "checkpoints": _ints, "backend": str, "samples": int, "seed": int, "tv_delta": float,
    "epsilon": lambda s: None if s.lower() in ("none", "off", "") else float(s),
    "timing_runs": int, "workers": int,
}


def parse_config(text: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment; unknown keys are errors."""
    values = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw!r}", n)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _PARSERS:
            raise ParseError(f"unknown config key {key!r}", n)
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as e:
            raise ParseError(f"bad value for {key}: {e}", n) from None
    return values


def load_config(path, **overrides) -> ExperimentConfig:
    values = parse_config(Path(path).read_text(encoding="utf-8"))
    base = Path(path).parent
    for key in ("dataset", "baseline_csv"):
        if key in values and not values[key].is_absolute():
            values[key] = base / values[key]
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig(**values)
    except ValueError as e:
        raise ParseError(str(e)) from None


# -- sampling ---------------------------------------------------------------

@dataclass(frozen=True)
class Instance:
    dataset: Dataset
    constraints: FairnessConstraints
    prefix: PrefixConstraints | None
    checkpoints: tuple[int, ...]


def prepare(config: ExperimentConfig) -> Instance:
    ds = ingest(config.dataset or bundled_german_path(), config.group_column, config.score_column,
                config.id_column)
    for label in config.protected:
        ds.group_index(label)
    if config.lower is not None:
        c = FairnessConstraints(config.k, config.lower, config.upper)
        if c.ell != len(ds.labels) or len(c.upper) != c.ell:
            raise ParseError(f"lower/upper need one value per group {list(ds.labels)}")
    else:
        c = build_constraints(ds.proportions, config.k, config.eta)
    validate(c, ds.in_group)
    prefix = None
    if config.prefix_block:
        prefix = PrefixConstraints.from_proportions(ds.proportions, config.k, config.eta, config.prefix_block)
        prefix.validate()
    return Instance(ds, c, prefix, config.resolved_checkpoints())


def _sampler(inst: Instance, config: ExperimentConfig, rng):
    walk = WalkConfig(tv_delta=config.tv_delta)
    if inst.prefix is not None:
        return PrefixSampler(inst.prefix, inst.dataset.in_group, config.backend, walk, rng)
    return FairRankingSampler(inst.constraints, inst.dataset.in_group, config.backend, walk, rng)


def _sample_chunk(args):
    inst, config, index, n = args
    return _sampler(inst, config, stream(config.seed, index)).sample_many(n)


def draw_samples(inst: Instance, config: ExperimentConfig) -> list[Ranking]:
    """``config.samples`` rankings; chunk ``c`` uses RNG stream ``c`` of the seed,
    so results do not depend on ``config.workers``."""
    jobs = [(inst, config, c, min(CHUNK, config.samples - c * CHUNK))
            for c in range(math.ceil(config.samples / CHUNK))]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            chunks = list(pool.map(_sample_chunk, jobs))
    else:
        chunks = [_sample_chunk(j) for j in jobs]
    return [r for chunk in chunks for r in chunk]


def check_ex_post(samples: Sequence[Ranking], inst: Instance) -> None:
    c = inst.constraints
    for r in samples:
        y = r.assignment
        ok = inst.prefix.satisfied_by(y) if inst.prefix is not None else is_group_fair(
            representation_of(y, c.ell), c)
        if not ok:
            raise FairRankError(f"sampled ranking violates the constraints: {y}")


def epsilon_greedy_samples(inst: Instance, config: ExperimentConfig) -> list[Ranking]:
    ds = inst.dataset
    primary = 0
    if len(ds.labels) == 2 and len(config.protected) == 1:
        primary = 1 - ds.group_index(config.protected[0])
    out = []
    for c in range(math.ceil(config.samples / CHUNK)):
        rng = stream(config.seed, _BASELINE_STREAM_OFFSET + c)
        for _ in range(min(CHUNK, config.samples - c * CHUNK)):
            out.append(fair_epsilon_greedy(inst.constraints, config.epsilon, ds.in_group, rng, primary))
    return out


def load_external_ranking(path, dataset: Dataset, k: int) -> Ranking:
    """A ranking produced elsewhere: CSV with ``rank`` and ``id`` columns."""
    group_of = {r.item_id: dataset.group_index(r.group) for r in dataset.records}
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if not {"rank", "id"} <= set(reader.fieldnames or []):
            raise ParseError("external ranking needs 'rank' and 'id' columns", 1)
        for row in reader:
            try:
                rows.append((int(row["rank"]), row["id"].strip()))
            except ValueError:
                raise ParseError(f"bad rank {row['rank']!r}", reader.line_num) from None
    rows.sort()
    if len(rows) < k:
        raise ParseError(f"external ranking has {len(rows)} rows, need {k}")
    try:
        return Ranking(tuple((a, group_of[a]) for _, a in rows[:k]))
    except KeyError as e:
        raise ParseError(f"unknown item {e.args[0]!r} in external ranking") from None


# -- output -----------------------------------------------------------------

def _g(v: float) -> str:
    return f"{v:.6g}"


class _Writer:
    def __init__(self, root: Path):
        self.root = root
        self.written: list[Path] = []
        self.created: list[Path] = []

    def path(self, rel: str) -> Path:
        p = self.root / rel
        for d in reversed(p.parents):
            if not d.exists():
                d.mkdir()
                self.created.append(d)
        return p

    def csv(self, rel: str, header, rows) -> Path:
        p = self.path(rel)
        with open(p, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
        self.written.append(p)
        return p

    def text(self, rel: str, content: str) -> Path:
        p = self.path(rel)
        p.write_text(content, encoding="utf-8")
        self.written.append(p)
        return p

    def rollback(self):
        for p in self.written:
            p.unlink(missing_ok=True)
        for d in reversed(self.created):
            try:
                d.rmdir()
            except OSError:
                pass


def metric_tables(samples: Sequence[Ranking], inst: Instance):
    """Rows for representation_curve.csv, fraction_of_rankings.csv and ndcg.csv."""
    ds, c, cps = inst.dataset, inst.constraints, inst.checkpoints
    Y = np.asarray([r.assignment for r in samples])
    rep = []
    cum = np.cumsum(Y[:, :, None] == np.arange(c.ell), axis=1)
    for i in cps:
        frac = cum[:, i - 1, :] / i
        for j, label in enumerate(ds.labels):
            rep.append([i, label, _g(frac[:, j].mean()), _g(frac[:, j].std())])
    fr = []
    for i in range(1, c.k + 1):
        for j, label in enumerate(ds.labels):
            fr.append([i, label, _g(float((Y[:, i - 1] == j).mean())), _g(c.lower[j] / c.k), _g(c.upper[j] / c.k)])
    scores = minmax_normalize(ds.scores)
    nd = []
    for i in cps:
        v = np.array([ndcg_at(r, scores, i) for r in samples])
        nd.append([i, _g(v.mean()), _g(v.std())])
    return rep, fr, nd


def _write_metrics(w: _Writer, prefix: str, samples, inst):
    rep, fr, nd = metric_tables(samples, inst)
    w.csv(prefix + "representation_curve.csv", ["checkpoint", "group", "mean", "std"], rep)
    w.csv(prefix + "fraction_of_rankings.csv", ["rank", "group", "fraction", "lower_bound", "upper_bound"], fr)
    w.csv(prefix + "ndcg.csv", ["checkpoint", "mean", "std"], nd)


def time_backends(inst: Instance, config: ExperimentConfig) -> list[list]:
    """Mean wall time to draw one ranking from scratch, per applicable backend."""
    ds, c = inst.dataset, inst.constraints
    walk = WalkConfig(tv_delta=config.tv_delta)
    runs = []
    backends = ["dp"] + (["walk"] if c.ell >= 2 and compute_delta(c) >= 1 else [])
    for b in backends:
        runs.append((b, lambda rng, b=b: FairRankingSampler(c, ds.in_group, b, walk, rng).sample()))
    if inst.prefix is not None:
        runs.append(("prefix-" + config.backend,
                     lambda rng: PrefixSampler(inst.prefix, ds.in_group, config.backend, walk, rng).sample()))
    rows = []
    for name, fn in runs:
        ts = []
        for r in range(config.timing_runs):
            t0 = time.perf_counter()
            fn(stream(config.seed, r))
            ts.append(time.perf_counter() - t0)
        rows.append([name, c.k, c.ell, _g(sum(ts) / len(ts))])
    return rows


def run_experiment(config: ExperimentConfig) -> dict[str, Path]:
    """Sample, verify ex post, and write the CSV artifacts plus a manifest.

    Files written under ``config.output``: ``samples.csv``,
    ``representation_curve.csv``, ``fraction_of_rankings.csv``, ``ndcg.csv``,
    ``timing.csv``, ``manifest.json`` and, for baselines, the same metric
    files under ``baselines/<name>/``.  On failure nothing is left behind.
    ``timing.csv`` holds wall-clock times and is the only non-reproducible file.
    """
    out = Path(config.output)
    w = _Writer(out)
    try:
        inst = prepare(config)
        samples = draw_samples(inst, config)
        check_ex_post(samples, inst)
        labels = inst.dataset.labels
        w.csv("samples.csv", ["sample", "rank", "id", "group"],
              ([s, i + 1, a, labels[g]] for s, r in enumerate(samples) for i, (a, g) in enumerate(r.entries)))
        _write_metrics(w, "", samples, inst)
        if config.epsilon is not None:
            _write_metrics(w, "baselines/eps_greedy/", epsilon_greedy_samples(inst, config), inst)
        if config.baseline_csv is not None:
            ext = load_external_ranking(config.baseline_csv, inst.dataset, config.k)
            _write_metrics(w, "baselines/external/", [ext], inst)
        w.csv("timing.csv", ["backend", "k", "ell", "mean_seconds"], time_backends(inst, config))
        c = inst.constraints
        manifest = {
            "version": __version__,
            "kernels": kernels.IMPLEMENTATION,
            "seed": config.seed,
            "config": config.echo(),
            "groups": list(labels),
            "lower": list(c.lower),
            "upper": list(c.upper),
            "prefix": None if inst.prefix is None else {
                str(i): {"lower": list(inst.prefix.lower[i]), "upper": list(inst.prefix.upper[i])}
                for i in inst.prefix.checkpoints},
            "files": sorted(str(p.relative_to(out)) for p in w.written) + ["manifest.json"],
        }
        w.text("manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    except BaseException:
        w.rollback()
        raise
    return {str(p.relative_to(out)): p for p in w.written}

