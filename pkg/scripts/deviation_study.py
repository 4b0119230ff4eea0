"""Pairwise F as the assumed number of clusters is shifted away from the truth.

Each deviation d sets k = K_true - d for the lambda rule and for K-means;
cells with k < 1 are skipped. Output is plot-ready CSV.

    python scripts/deviation_study.py --dataset iris --out deviation.csv
"""
from __future__ import annotations

import argparse

from relclust.harness import RunConfig, emit, run_sweep, sweep_grid


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dataset", default="iris")
    ap.add_argument("--r", type=float, default=0.03)
    ap.add_argument("--p", type=float, default=1.0)
    ap.add_argument("--deviation", type=int, nargs="+", default=list(range(-3, 4)))
    ap.add_argument("--algorithm", nargs="+", default=["kmeans", "dp_means", "rdp_means"])
    ap.add_argument("--trials", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="deviation_study.csv")
    args = ap.parse_args()

    base = RunConfig(dataset=args.dataset, r=args.r, p=args.p, trials=args.trials, seed=args.seed)
    cells = run_sweep(sweep_grid(base, algorithm=args.algorithm, deviation=args.deviation))
    emit(cells, "csv", args.out)
    for c in cells:
        status = f"F={c.result.mean['F']:.3f}" if c.ok else ("skipped" if c.skipped else c.error)
        print(f"{c.config.algorithm:<10} deviation={c.config.deviation:+d}  {status}")
    print(f"rows written to {args.out}")


if __name__ == "__main__":
    main()
