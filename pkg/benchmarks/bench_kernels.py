"""Compare the compiled and pure-Python kernels on identical inputs.

Run from the repository root after an editable install::

    python3 benchmarks/bench_kernels.py
"""
import argparse

from fairrank import kernels
from fairrank.bench import compare_kernels


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ell", type=int, default=10)
    ap.add_argument("--steps", type=int, default=100_000)
    ap.add_argument("--k", type=int, default=2000)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    print(f"active implementation: {kernels.IMPLEMENTATION}")
    rows = compare_kernels(ell=args.ell, steps=args.steps, k=args.k, repeats=args.repeats)
    print(f"{'kernel':<22}{'impl':<8}{'size':<24}{'seconds':>10}{'speedup':>9}")
    for r in rows:
        print(f"{r['kernel']:<22}{r['implementation']:<8}{r['size']:<24}{r['seconds']:>10.4f}{r['speedup']:>8.1f}x")


if __name__ == "__main__":
    main()
