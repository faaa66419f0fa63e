"""Command-line entry point: ``fairrank sample|verify|experiment|bench``."""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    FairRankError,
    InfeasibleConstraints,
    InsufficientItems,
    ParseError,
    RejectionBudgetExceeded,
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INFEASIBLE = 2
EXIT_PARSE = 3
EXIT_REJECTIONS = 4


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_instance_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", type=Path, help="CSV with id, group, score columns (default: bundled synthetic credit data)")
    p.add_argument("--id-column", default="id")
    p.add_argument("--group-column", default="group")
    p.add_argument("--score-column", default="score")
    p.add_argument("-k", "--k", type=int, default=100, help="ranking length (default: %(default)s)")
    p.add_argument("--eta", type=float, default=0.1, help="slack around group proportions (default: %(default)s)")
    p.add_argument("--lower", type=_int_list, help="explicit per-group lower bounds, groups in sorted label order")
    p.add_argument("--upper", type=_int_list, help="explicit per-group upper bounds")
    p.add_argument("--backend", choices=("dp", "walk"), default="dp")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tv-delta", type=float, default=0.05, help="walk sampler TV target (default: %(default)s)")
    p.add_argument("--prefix-block", type=int, help="impose bounds at every multiple of this block size")


def _config_from(args, **extra):
    from .experiment import ExperimentConfig

    try:
        return ExperimentConfig(
            dataset=args.dataset, id_column=args.id_column, group_column=args.group_column,
            score_column=args.score_column, k=args.k, eta=args.eta, lower=args.lower, upper=args.upper,
            backend=args.backend, seed=args.seed, tv_delta=args.tv_delta, prefix_block=args.prefix_block,
            **extra)
    except ValueError as e:
        raise ParseError(str(e)) from None


def cmd_sample(args) -> int:
    from .experiment import check_ex_post, draw_samples, prepare

    config = _config_from(args, samples=args.n, epsilon=None, workers=args.workers)
    inst = prepare(config)
    samples = draw_samples(inst, config)
    check_ex_post(samples, inst)
    labels = inst.dataset.labels
    fh = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sample", "rank", "id", "group"])
        for s, r in enumerate(samples):
            for i, (item, g) in enumerate(r.entries):
                w.writerow([s, i + 1, item, labels[g]])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def _report(label: str, passed: bool, detail: str) -> bool:
    print(f"{'PASS' if passed else 'FAIL'}  {label}: {detail}")
    return passed


def cmd_verify(args) -> int:
    from .assembly import FairRankingSampler
    from .dp import build_count_table
    from .evaluation import (
        brute_force_enumerate,
        check_rank_marginals,
        check_window_expectations,
        chi_square_uniformity,
        collect,
        histogram,
        tv_distance_to_uniform,
    )
    from .model import FairnessConstraints, in_group_rankings, validate
    from .polytope import WalkConfig

    if args.lower is None or args.upper is None:
        raise ParseError("verify needs --lower and --upper")
    c = FairnessConstraints(args.k, args.lower, args.upper)
    validate(c)
    ok = True
    points = brute_force_enumerate(c)
    table = build_count_table(c)
    ok &= _report("count", table.total == len(points), f"dp={table.total} brute-force={len(points)}")

    items = in_group_rankings([[f"g{j}-{t}" for t in range(c.upper[j])] for j in range(c.ell)])
    sampler = FairRankingSampler(c, items, args.backend, WalkConfig(tv_delta=args.tv_delta), args.seed)
    samples = sampler.sample_many(args.n)
    st = collect(samples, c.k, c.ell)
    reps = [x for x, m in st.representations.items() for _ in range(m)]
    counts, outside = histogram(reps, points)
    tv = tv_distance_to_uniform(counts, outside)
    tv_limit = args.tv_limit if args.tv_limit is not None else (0.02 if args.backend == "dp" else args.tv_delta)
    ok &= _report("total variation", tv <= tv_limit, f"{tv:.4f} (limit {tv_limit})")
    if len(points) >= 2 and args.n / len(points) >= 5:
        chi = chi_square_uniformity(counts, args.alpha)
        ok &= _report("chi-square", chi.passed,
                      f"stat={chi.statistic:.2f} critical={chi.critical:.2f} p={chi.p_value:.3g}")
    else:
        print("SKIP  chi-square: too few samples per lattice point")

    marg = check_rank_marginals(st, c, args.n_se)
    bad = [b for b in marg if not b.passed]
    ok &= _report("rank marginals", not bad, f"{len(marg) - len(bad)}/{len(marg)} within bounds")
    rng = np.random.default_rng(args.seed)
    windows = []
    for _ in range(args.windows):
        a, b = sorted(int(v) for v in rng.integers(1, c.k + 1, size=2))
        windows.append((a, b))
    win = check_window_expectations(samples, c, windows, args.n_se)
    bad = [b for b in win if not b.passed]
    ok &= _report("window expectations", not bad, f"{len(win) - len(bad)}/{len(win)} within bounds")
    return EXIT_OK if ok else EXIT_FAILED


def cmd_experiment(args) -> int:
    from .experiment import ExperimentConfig, load_config, run_experiment

    overrides = dict(output=args.output, seed=args.seed, samples=args.samples, backend=args.backend,
                     workers=args.workers)
    if args.config:
        config = load_config(args.config, **overrides)
    else:
        try:
            config = ExperimentConfig(**{k: v for k, v in overrides.items() if v is not None})
        except ValueError as e:
            raise ParseError(str(e)) from None
    files = run_experiment(config)
    for name in sorted(files):
        print(files[name])
    return EXIT_OK


def cmd_bench(args) -> int:
    from .bench import compare_kernels, timing_grid

    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        if args.kernels:
            w.writerow(["kernel", "implementation", "size", "seconds", "speedup"])
            for r in compare_kernels():
                w.writerow([r["kernel"], r["implementation"], r["size"], f"{r['seconds']:.6g}", f"{r['speedup']:.3g}"])
        else:
            w.writerow(["backend", "k", "ell", "mean_seconds"])
            timing_grid(args.ks, args.ells, args.runs,
                        progress=lambda t: (w.writerow([t.backend, t.k, t.ell, f"{t.mean_seconds:.6g}"]), out.flush()))
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairrank", description="Sample ex-post group-fair top-k rankings.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw rankings and write them as CSV")
    _add_instance_args(p)
    p.add_argument("-n", type=int, default=10, help="number of rankings (default: %(default)s)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--out", type=Path, help="output CSV (default: stdout)")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("verify", help="check a small instance against the brute-force oracle")
    p.add_argument("-k", "--k", type=int, required=True)
    p.add_argument("--lower", type=_int_list)
    p.add_argument("--upper", type=_int_list)
    p.add_argument("--backend", choices=("dp", "walk"), default="dp")
    p.add_argument("-n", type=int, default=100_000, help="samples (default: %(default)s)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tv-delta", type=float, default=0.05)
    p.add_argument("--tv-limit", type=float, help="TV pass threshold (default 0.02 for dp, tv-delta for walk)")
    p.add_argument("--alpha", type=float, default=0.01, help="chi-square significance (default: %(default)s)")
    p.add_argument("--n-se", type=float, default=3.0, help="standard errors of slack (default: %(default)s)")
    p.add_argument("--windows", type=int, default=50, help="random rank windows to check (default: %(default)s)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("experiment", help="write plot-ready CSVs for a configured experiment")
    p.add_argument("--config", type=Path, help="key = value config file")
    p.add_argument("--output", type=Path)
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--backend", choices=("dp", "walk"))
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("bench", help="timing grid for both samplers, or kernel comparison")
    p.add_argument("--ks", type=_int_list, default=(100, 1000, 10000, 20000))
    p.add_argument("--ells", type=_int_list, default=(2, 5, 10))
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--kernels", action="store_true", help="compare compiled and pure-Python kernels instead")
    p.add_argument("-o", "--out", type=Path)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InfeasibleConstraints, InsufficientItems) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except RejectionBudgetExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_REJECTIONS
    except (FairRankError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
