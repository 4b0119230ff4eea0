"""Experiment harness: data loading, run configuration, dispatch, sweeps, output.

Each trial ``t`` of a run uses seed ``seed + t`` both for sampling the side
information and for the algorithm's own randomness. Real-valued features
are standardised per column unless ``standardize=False``.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import bregman, gibbs, metrics, rdp, spectral
from .bregman import DivergenceModel
from .core import CredibilityParams, DataMatrix, Kind, RdpHyperParams, SideInfo, encode_labels
from .sideinfo import PATTERNS, NoiseSpec, gen_pattern, gen_topic_counts, sample_constraints

log = logging.getLogger(__name__)

ALGORITHMS = ("kmeans", "dp_means", "rdp_means", "tvclust", "spectral")
UCI_DATASETS = ("iris", "wine", "ecoli", "glass", "balance")
CSV_HEADER = ("dataset", "algorithm", "r", "p", "deviation", "trial", "F", "ARI", "NMI", "K_found", "seed")
_LAMBDA_FLOOR = 1e-12


class ConfigError(ValueError):
    """Run configuration is inconsistent; raised before any work starts."""


class SkippedCell(ConfigError):
    """The cell asks for a non-positive effective k."""


# -- data ------------------------------------------------------------------

def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def load_csv(path, label_column: int | None = None, kind: Kind | str = Kind.REAL,
             standardize: bool = False) -> tuple[DataMatrix, np.ndarray | None]:
    """Read a comma-separated numeric table.

    A first row with any non-numeric feature cell is taken as a header.
    ``label_column`` (negative indices allowed) names a column holding class
    labels of any type; they are encoded 0..K-1 by first appearance.
    """
    kind = Kind(kind)
    text = Path(path).read_text()
    rows = [(ln, row) for ln, row in enumerate(csv.reader(io.StringIO(text)), start=1)
            if row and any(c.strip() for c in row)]
    if not rows:
        raise ValueError(f"{path}: empty file")
    width = len(rows[0][1])
    lc = None
    if label_column is not None:
        lc = label_column % width if -width <= label_column < width else None
        if lc is None:
            raise ValueError(f"{path}: label column {label_column} out of range for {width} columns")
    feat_cols = [c for c in range(width) if c != lc]
    if not feat_cols:
        raise ValueError(f"{path}: no feature columns")
    if not all(_is_number(rows[0][1][c]) for c in feat_cols):
        rows = rows[1:]
    if not rows:
        raise ValueError(f"{path}: header but no data")
    values = np.empty((len(rows), len(feat_cols)))
    labels = []
    for r, (ln, row) in enumerate(rows):
        if len(row) != width:
            raise ValueError(f"{path}: line {ln} has {len(row)} fields, expected {width}")
        for c_out, c in enumerate(feat_cols):
            try:
                values[r, c_out] = float(row[c])
            except ValueError:
                raise ValueError(f"{path}: line {ln}, column {c}: non-numeric value {row[c]!r}") from None
        if lc is not None:
            labels.append(row[lc].strip())
    if standardize and kind is Kind.REAL:
        values = standardize_columns(values)
    y = encode_labels(labels) if lc is not None else None
    return DataMatrix(values, kind), y


def standardize_columns(X: np.ndarray) -> np.ndarray:
    """Zero mean, unit variance per column; constant columns are only centred."""
    X = np.asarray(X, dtype=float)
    sd = X.std(axis=0)
    return (X - X.mean(axis=0)) / np.where(sd > 0, sd, 1.0)


def dataset_names() -> tuple[str, ...]:
    return UCI_DATASETS + ("topics",) + PATTERNS


def load_dataset(name: str, standardize: bool = True, seed: int = 0,
                 n_pattern: int = 300, noise_sd: float = 0.05) -> tuple[DataMatrix, np.ndarray | None]:
    """Bundled UCI table, synthetic topic counts, a 2-d pattern, or a CSV path.

    CSV paths are read with the label in the last column.
    """
    if name in UCI_DATASETS:
        with resources.as_file(resources.files("relclust") / "data" / f"{name}.csv") as p:
            return load_csv(p, label_column=-1, standardize=standardize)
    if name == "topics":
        return gen_topic_counts(seed=seed)
    if name in PATTERNS:
        data, y = gen_pattern(name, n_pattern, noise_sd, seed)
        if standardize:
            data = DataMatrix(standardize_columns(data.values), Kind.REAL)
        return data, y
    path = Path(name)
    if not path.is_file():
        raise ConfigError(f"unknown dataset {name!r}; use one of {dataset_names()} or a CSV path")
    return load_csv(path, label_column=-1, standardize=standardize)


# -- configuration ----------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    dataset: str = "iris"
    algorithm: str = "rdp_means"
    model: str = "gaussian"            # or "multinomial"
    sigma2: float | None = None        # None -> 0.5 (deterministic) / data-driven (tvclust)
    laplace_alpha: float = 0.3
    r: float = 0.05
    p: float = 1.0
    q: float | None = None             # None -> p
    k: int | None = None
    deviation: int | None = None       # effective k = true K - deviation
    trials: int = 5
    seed: int = 0
    standardize: bool = True
    # RDP-means schedule
    xi0: float = 0.001
    xi_rate: float = 2.0
    xi1_xi2_ratio: float = 1.0
    max_iters: int = 500
    stable_iters: int = 20
    # TVClust
    alpha: float = 1.0
    sweeps: int = 1000
    burn_in: int = 500
    thin: int = 5
    learn_pq: bool = True
    # spectral relaxation weight on the link matrices
    spectral_xi: float = 1.0
    # 2-d generators
    n_pattern: int = 300
    noise_sd: float = 0.05

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        return cls(**d)

    def validate(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.model not in ("gaussian", "multinomial"):
            raise ConfigError(f"model must be gaussian or multinomial, got {self.model!r}")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.k is not None and self.deviation is not None:
            raise ConfigError("set exactly one of k and deviation")
        if self.algorithm != "tvclust" and self.k is None and self.deviation is None:
            raise ConfigError(f"{self.algorithm} needs k or deviation")
        if self.k is not None and self.k < 1:
            raise ConfigError("k must be positive")
        if self.sigma2 is not None and not self.sigma2 > 0:
            raise ConfigError("sigma2 must be positive")
        try:
            NoiseSpec(self.r, self.p, self.q)
            gibbs.GibbsConfig(alpha=self.alpha, sweeps=self.sweeps, burn_in=self.burn_in, thin=self.thin)
            RdpHyperParams(1.0, self.xi0, self.xi_rate, self.xi1_xi2_ratio,
                           self.max_iters, self.stable_iters)
        except ValueError as e:
            raise ConfigError(str(e)) from None


@dataclass(frozen=True)
class TrialResult:
    trial: int
    seed: int
    F: float
    ARI: float
    NMI: float
    K_found: int
    iterations: int
    lam: float
    wall_time: float = field(default=0.0, compare=False)


@dataclass(frozen=True)
class RunResult:
    config: RunConfig
    trials: tuple[TrialResult, ...]

    @property
    def mean(self) -> dict[str, float]:
        return {m: float(np.mean([getattr(t, m) for t in self.trials]))
                for m in ("F", "ARI", "NMI", "K_found")}


# -- running ----------------------------------------------------------------

def _model(cfg: RunConfig, X: np.ndarray) -> DivergenceModel:
    if cfg.model == "multinomial":
        return DivergenceModel.multinomial(cfg.laplace_alpha)
    if cfg.sigma2 is not None:
        return DivergenceModel.gaussian(cfg.sigma2)
    if cfg.algorithm == "tvclust":
        return DivergenceModel.gaussian(bregman.default_sigma2(X))
    return DivergenceModel.gaussian()


def effective_k(cfg: RunConfig, labels: np.ndarray | None) -> int | None:
    if cfg.k is not None:
        return cfg.k
    if cfg.deviation is None:
        return None
    if labels is None:
        raise ConfigError("deviation needs ground-truth labels")
    k = int(labels.max()) + 1 - cfg.deviation
    if k < 1:
        raise SkippedCell(f"effective k = {k} for deviation {cfg.deviation}")
    return k


def _spectral_k(X, E, lam, xi):
    M = spectral.build_spectral_matrix(X, E, xi, xi, lam, is_data=True)
    return spectral.spectral_relaxation(M, lam).k_hat


def run_trial(cfg: RunConfig, data: DataMatrix, labels, t: int) -> TrialResult:
    seed_t = cfg.seed + t
    start = time.perf_counter()
    n = data.n
    if labels is not None:
        E = sample_constraints(labels, NoiseSpec(cfg.r, cfg.p, cfg.q, seed=seed_t))
    else:
        E = SideInfo(n)
    model = _model(cfg, data.values)
    k = effective_k(cfg, labels)
    if k is not None and k > n:
        raise ConfigError(f"effective k = {k} exceeds n = {n}")
    lam = 0.0
    if k is not None:
        lam = max(rdp.lambda_kth_furthest(data, k, model), _LAMBDA_FLOOR)
    iterations = 0
    if cfg.algorithm == "kmeans":
        part, _ = rdp.kmeans(data, k, model, seed=seed_t)
    elif cfg.algorithm == "dp_means":
        part, _ = rdp.dp_means(data, RdpHyperParams(lam, max_iters=cfg.max_iters,
                                                    stable_iters=min(cfg.stable_iters, cfg.max_iters)), model)
    elif cfg.algorithm == "rdp_means":
        hp = RdpHyperParams(lam, cfg.xi0, cfg.xi_rate, cfg.xi1_xi2_ratio, cfg.max_iters, cfg.stable_iters)
        res = rdp.rdp_means(data, E, hp, model)
        part, iterations = res.partition, res.iterations
    elif cfg.algorithm == "tvclust":
        gc = gibbs.GibbsConfig(alpha=cfg.alpha, sweeps=cfg.sweeps, burn_in=cfg.burn_in, thin=cfg.thin,
                               seed=seed_t, cred=CredibilityParams(learn=cfg.learn_pq))
        trace = gibbs.run_gibbs(data, E, model, None, gc)
        part, iterations = gibbs.map_partition(trace), cfg.sweeps
    else:
        # the relaxation yields an estimate of K only, no discrete partition
        k_hat = _spectral_k(bregman.prepare(model, data), E, lam, cfg.spectral_xi)
        return TrialResult(t, seed_t, math.nan, math.nan, math.nan, k_hat, 0, lam,
                           time.perf_counter() - start)
    z = part.assignments
    if labels is None:
        F = ARI = NMI = math.nan
    else:
        F, ARI, NMI = metrics.pairwise_f(z, labels), metrics.adjusted_rand(z, labels), metrics.nmi(z, labels)
    return TrialResult(t, seed_t, F, ARI, NMI, part.K, iterations, lam,
                       time.perf_counter() - start)


def run_experiment(cfg: RunConfig) -> RunResult:
    cfg.validate()
    data, labels = load_dataset(cfg.dataset, standardize=cfg.standardize and cfg.model == "gaussian",
                                seed=cfg.seed, n_pattern=cfg.n_pattern, noise_sd=cfg.noise_sd)
    if cfg.model == "multinomial" and np.any(data.values < 0):
        raise ConfigError("multinomial model needs nonnegative features")
    effective_k(cfg, labels)  # surface skipped cells before any trial runs
    trials = tuple(run_trial(cfg, data, labels, t) for t in range(cfg.trials))
    return RunResult(cfg, trials)


# -- sweeps -----------------------------------------------------------------

SWEEP_AXES = ("dataset", "algorithm", "r", "p", "deviation")


@dataclass(frozen=True)
class SweepCell:
    config: RunConfig
    result: RunResult | None = None
    error: str | None = None
    skipped: bool = False

    @property
    def ok(self) -> bool:
        return self.result is not None


def sweep_grid(base: RunConfig, **axes) -> list[RunConfig]:
    """Cartesian product over the given axes (dataset-major order)."""
    unknown = set(axes) - set(SWEEP_AXES)
    if unknown:
        raise ConfigError(f"cannot sweep over {sorted(unknown)}")
    names = [a for a in SWEEP_AXES if a in axes]
    values = [list(axes[a]) for a in names]
    if any(len(v) == 0 for v in values):
        raise ConfigError("every sweep axis needs at least one value")
    out = []
    for combo in itertools.product(*values):
        upd = dict(zip(names, combo))
        if "deviation" in upd:
            upd["k"] = None
        out.append(replace(base, **upd))
    return out


def _run_cell(cfg: RunConfig) -> SweepCell:
    try:
        return SweepCell(cfg, run_experiment(cfg))
    except SkippedCell as e:
        return SweepCell(cfg, error=str(e), skipped=True)
    except Exception as e:  # recorded per cell; the sweep continues
        log.debug("cell %s failed: %s", cfg, e)
        return SweepCell(cfg, error=f"{type(e).__name__}: {e}")


def worker_count() -> int:
    env = os.environ.get("RELCLUST_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"RELCLUST_THREADS must be an integer, got {env!r}") from None
        return max(1, n)
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1))


def run_sweep(configs: list[RunConfig], workers: int | None = None) -> list[SweepCell]:
    """Run every cell; results come back in grid order."""
    if not configs:
        raise ConfigError("empty sweep grid")
    workers = worker_count() if workers is None else max(1, workers)
    if workers == 1 or len(configs) == 1:
        return [_run_cell(c) for c in configs]
    with ProcessPoolExecutor(max_workers=min(workers, len(configs))) as pool:
        return list(pool.map(_run_cell, configs))


# -- output -----------------------------------------------------------------

def _num(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return None if math.isnan(x) else float(f"{x:.6g}")
    return x


def records(results) -> list[dict]:
    """One flat record per trial, in the fixed CSV field order plus the config echo."""
    out = []
    for res in results:
        if isinstance(res, SweepCell):
            if not res.ok:
                continue
            res = res.result
        c = res.config
        for t in res.trials:
            rec = {
                "dataset": c.dataset, "algorithm": c.algorithm, "r": _num(c.r), "p": _num(c.p),
                "deviation": c.deviation, "trial": t.trial, "F": _num(t.F), "ARI": _num(t.ARI),
                "NMI": _num(t.NMI), "K_found": t.K_found, "seed": t.seed,
            }
            rec["config"] = {k: _num(v) for k, v in asdict(c).items()}
            out.append(rec)
    return out


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def emit(results, fmt: str = "csv", out=None) -> str:
    """Serialise results as CSV (fixed header) or JSON lines.

    ``out`` may be a path or a text stream; the text is also returned.
    """
    recs = records(results)
    if not recs:
        raise ValueError("nothing to emit")
    if fmt == "csv":
        lines = [",".join(CSV_HEADER)]
        lines += [",".join(_csv_cell(r[h]) for h in CSV_HEADER) for r in recs]
        text = "\n".join(lines) + "\n"
    elif fmt == "json":
        text = "".join(json.dumps(r, allow_nan=False) + "\n" for r in recs)
    else:
        raise ValueError(f"format must be csv or json, got {fmt!r}")
    if out is None:
        return text
    if isinstance(out, (str, os.PathLike)):
        try:
            Path(out).write_text(text)
        except OSError as e:
            raise OSError(f"cannot write {out}: {e}") from e
    else:
        out.write(text)
    return text
