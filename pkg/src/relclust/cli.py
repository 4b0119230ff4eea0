"""Command line entry point: ``relclust {cluster,sweep,gen-pattern,gen-constraints,eval}``.

Settings come from flags, optionally layered over a JSON config file
(``--config``) whose keys are :class:`~relclust.harness.RunConfig` fields.
Exit status: 0 on success, 1 on a configuration error, 2 when some sweep
cells failed.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import metrics
from .core import encode_labels
from .harness import (ALGORITHMS, ConfigError, RunConfig, emit, load_dataset,
                      run_experiment, run_sweep, sweep_grid)
from .sideinfo import PATTERNS, NoiseSpec, gen_pattern, sample_constraints

log = logging.getLogger("relclust")

# flags that map one-to-one onto RunConfig fields
_RUN_FLAGS = ("dataset", "algorithm", "model", "sigma2", "laplace_alpha", "r", "p", "q", "k",
              "deviation", "trials", "seed", "xi0", "xi_rate", "xi1_xi2_ratio", "max_iters",
              "stable_iters", "alpha", "sweeps", "burn_in", "thin", "spectral_xi", "n_pattern", "noise_sd")


def _add_run_options(ap: argparse.ArgumentParser, sweep: bool = False) -> None:
    many = {"nargs": "+"} if sweep else {}
    ap.add_argument("--config", type=Path, help="JSON file with RunConfig fields")
    ap.add_argument("--dataset", **many, help="bundled name, 2-d pattern, 'topics' or CSV path")
    ap.add_argument("--algorithm", **many, choices=ALGORITHMS)
    ap.add_argument("--model", choices=("gaussian", "multinomial"))
    ap.add_argument("--sigma2", type=float)
    ap.add_argument("--laplace-alpha", dest="laplace_alpha", type=float)
    ap.add_argument("--r", type=float, **many, help="fraction of pairs given as side information")
    ap.add_argument("--p", type=float, **many, help="credibility of true same-cluster pairs")
    ap.add_argument("--q", type=float, help="credibility of true different-cluster pairs (default p)")
    ap.add_argument("--k", type=int)
    ap.add_argument("--deviation", type=int, **many, help="use k = true K - deviation")
    ap.add_argument("--trials", type=int)
    ap.add_argument("--seed", type=int, required=sweep)
    ap.add_argument("--xi0", type=float)
    ap.add_argument("--xi-rate", dest="xi_rate", type=float)
    ap.add_argument("--xi-ratio", dest="xi1_xi2_ratio", type=float)
    ap.add_argument("--max-iters", dest="max_iters", type=int)
    ap.add_argument("--stable-iters", dest="stable_iters", type=int)
    ap.add_argument("--alpha", type=float, help="DP concentration for tvclust")
    ap.add_argument("--sweeps", type=int)
    ap.add_argument("--burn-in", dest="burn_in", type=int)
    ap.add_argument("--thin", type=int)
    ap.add_argument("--fixed-pq", dest="learn_pq", action="store_false", default=None,
                    help="keep p, q fixed instead of resampling them")
    ap.add_argument("--spectral-xi", dest="spectral_xi", type=float)
    ap.add_argument("--n-pattern", dest="n_pattern", type=int)
    ap.add_argument("--noise-sd", dest="noise_sd", type=float)
    ap.add_argument("--no-standardize", dest="standardize", action="store_false", default=None)
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--out", type=Path, help="output file (default stdout)")


def _settings(args, skip=()) -> dict:
    base = {}
    if args.config is not None:
        try:
            base = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {args.config}: {e}") from None
        if not isinstance(base, dict):
            raise ConfigError("config file must hold a JSON object")
    for name in _RUN_FLAGS + ("learn_pq", "standardize"):
        if name in skip:
            continue
        v = getattr(args, name, None)
        if v is not None:
            base[name] = v
    return base


def _write(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_cluster(args) -> int:
    settings = _settings(args)
    if settings.get("algorithm", "rdp_means") != "tvclust" and "k" not in settings:
        settings.setdefault("deviation", 0)
    result = run_experiment(RunConfig.from_dict(settings))
    emit([result], args.format, args.out if args.out else sys.stdout)
    return 0


def cmd_sweep(args) -> int:
    axes_names = ("dataset", "algorithm", "r", "p", "deviation")
    base = _settings(args, skip=axes_names)
    axes = {}
    for name in axes_names:
        v = getattr(args, name)
        if v is not None:
            axes[name] = v
    if "deviation" not in axes and "k" not in base and "deviation" not in base:
        axes["deviation"] = [0]
    cfg = RunConfig.from_dict(base)
    grid = sweep_grid(cfg, **axes)
    for c in grid:
        try:
            c.validate()
        except ConfigError as e:
            raise ConfigError(f"invalid cell {c.dataset}/{c.algorithm}: {e}") from None
    cells = run_sweep(grid)
    done = [c for c in cells if c.ok]
    failed = [c for c in cells if not c.ok and not c.skipped]
    for c in cells:
        if not c.ok:
            log.warning("%s %s/%s r=%s p=%s deviation=%s: %s", "skipped" if c.skipped else "failed",
                        c.config.dataset, c.config.algorithm, c.config.r, c.config.p,
                        c.config.deviation, c.error)
    if done:
        emit(done, args.format, args.out if args.out else sys.stdout)
    return 2 if failed or not done else 0


def cmd_gen_pattern(args) -> int:
    data, y = gen_pattern(args.name, args.n, args.noise_sd, args.seed)
    lines = ["x1,x2,class"] + [f"{a:.10g},{b:.10g},{c}" for (a, b), c in zip(data.values, y)]
    _write("\n".join(lines) + "\n", args.out)
    return 0


def _read_labels(path: Path) -> np.ndarray:
    """One label per row; with several columns the last one is used."""
    rows = [r for r in csv.reader(path.read_text().splitlines()) if r]
    if rows and rows[0][-1].strip().lower() in ("class", "label", "labels", "y"):
        rows = rows[1:]
    if not rows:
        raise ConfigError(f"{path}: no labels")
    return encode_labels([r[-1].strip() for r in rows])


def cmd_gen_constraints(args) -> int:
    if args.labels is not None:
        y = _read_labels(args.labels)
    else:
        _, y = load_dataset(args.dataset, seed=args.seed)
        if y is None:
            raise ConfigError(f"{args.dataset} has no labels")
    E = sample_constraints(y, NoiseSpec(args.r, args.p, args.q, args.seed))
    i, j, v = E.arrays
    lines = ["i,j,link"] + [f"{a},{b},{'may' if c else 'may_not'}" for a, b, c in zip(i, j, v)]
    _write("\n".join(lines) + "\n", args.out)
    return 0


def cmd_eval(args) -> int:
    pred, truth = _read_labels(args.pred), _read_labels(args.truth)
    if pred.size != truth.size:
        raise ConfigError(f"{pred.size} predicted labels vs {truth.size} true labels")
    out = {"F": metrics.pairwise_f(pred, truth), "ARI": metrics.adjusted_rand(pred, truth),
           "NMI": metrics.nmi(pred, truth)}
    _write(json.dumps({k: float(f"{v:.6g}") for k, v in out.items()}) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="relclust", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("cluster", help="run one configuration over several trials")
    _add_run_options(c)
    c.set_defaults(func=cmd_cluster)

    s = sub.add_parser("sweep", help="grid over dataset x algorithm x r x p x deviation")
    _add_run_options(s, sweep=True)
    s.set_defaults(func=cmd_sweep)

    g = sub.add_parser("gen-pattern", help="write a synthetic 2-d dataset as CSV")
    g.add_argument("--name", choices=PATTERNS, required=True)
    g.add_argument("--n", type=int, default=300)
    g.add_argument("--noise-sd", dest="noise_sd", type=float, default=0.05)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", type=Path)
    g.set_defaults(func=cmd_gen_pattern)

    k = sub.add_parser("gen-constraints", help="sample noisy may / may-not links from labels")
    src = k.add_mutually_exclusive_group(required=True)
    src.add_argument("--labels", type=Path, help="CSV whose last column holds the labels")
    src.add_argument("--dataset")
    k.add_argument("--r", type=float, default=0.05)
    k.add_argument("--p", type=float, default=1.0)
    k.add_argument("--q", type=float)
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--out", type=Path)
    k.set_defaults(func=cmd_gen_constraints)

    e = sub.add_parser("eval", help="score a predicted labelling against the truth")
    e.add_argument("--pred", type=Path, required=True)
    e.add_argument("--truth", type=Path, required=True)
    e.add_argument("--out", type=Path)
    e.set_defaults(func=cmd_eval)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:  # usage errors are configuration errors here, not partial failures
        return 1 if e.code == 2 else int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as e:
        log.error("%s", e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
