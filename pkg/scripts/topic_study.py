"""Synthetic topic-count experiments: model comparison and constraint dose response.

The comparison runs K-means, DP-means and RDP-means under the Gaussian and
the multinomial (KL) model at one r; the dose response runs multinomial
RDP-means over a range of r.

    python scripts/topic_study.py --out-prefix topics
"""
from __future__ import annotations

import argparse
from dataclasses import replace

from relclust.harness import RunConfig, emit, run_sweep, sweep_grid


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--r", type=float, default=0.05, help="side information for the comparison")
    ap.add_argument("--dose", type=float, nargs="+", default=[0.0, 0.01, 0.02, 0.04, 0.06])
    ap.add_argument("--trials", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-prefix", default="topics")
    args = ap.parse_args()

    base = RunConfig(dataset="topics", trials=args.trials, seed=args.seed, deviation=0, r=args.r)
    grid = [c for m in ("gaussian", "multinomial")
            for c in sweep_grid(replace(base, model=m), algorithm=["kmeans", "dp_means", "rdp_means"])]
    cells = run_sweep(grid)
    emit(cells, "csv", f"{args.out_prefix}_models.csv")
    for c in cells:
        print(f"{c.config.model:<12}{c.config.algorithm:<10} F={c.result.mean['F']:.3f}")

    dose = run_sweep(sweep_grid(replace(base, model="multinomial"), r=args.dose))
    emit(dose, "csv", f"{args.out_prefix}_dose.csv")
    for c in dose:
        print(f"r={c.config.r:<6g} F={c.result.mean['F']:.3f}")


if __name__ == "__main__":
    main()
