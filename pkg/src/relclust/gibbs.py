"""Gibbs sampler for the two-view DP mixture (TVClust).

Cluster parameters are kept explicitly (Neal's Algorithm 2): each sweep
reassigns every instance given the current parameters, then redraws each
cluster's parameter from its conjugate posterior. The side information
enters the assignment weights through the friend / stranger counts:

    w_k   ~ n_{-i,k} p(x_i | theta_k) (p / (1-q))^f_k ((1-p) / q)^s_k
    w_new ~ alpha * marginal(x_i)

which is the full conditional divided by the constant
prod_{j linked to i} q^(1-E_ij) (1-q)^E_ij.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from . import bregman
from .bregman import DivergenceModel, PriorParams
from .core import CredibilityParams, DataMatrix, Partition, SideInfo, compact_labels


@dataclass(frozen=True)
class GibbsConfig:
    alpha: float = 1.0
    cred: CredibilityParams = field(default_factory=CredibilityParams)
    sweeps: int = 1000
    burn_in: int = 500
    seed: int = 0
    thin: int = 5

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.sweeps < 1 or self.thin < 1:
            raise ValueError("sweeps and thin must be positive")
        if not 0 <= self.burn_in < self.sweeps:
            raise ValueError("need 0 <= burn_in < sweeps")


@dataclass
class GibbsTrace:
    samples: list[Partition] = field(default_factory=list)
    sample_log_joint: list[float] = field(default_factory=list)
    p_samples: list[float] = field(default_factory=list)
    q_samples: list[float] = field(default_factory=list)
    log_joint: list[float] = field(default_factory=list)


@dataclass
class GibbsState:
    """Mutable chain state: assignments, per-cluster statistics and parameters."""

    z: np.ndarray
    sums: list[np.ndarray]
    counts: list[int]
    thetas: list[np.ndarray]
    p: float
    q: float

    @property
    def K(self) -> int:
        return len(self.counts)

    def partition(self) -> Partition:
        return Partition(compact_labels(self.z))

    def remove(self, i: int, x: np.ndarray) -> None:
        k = int(self.z[i])
        self.counts[k] -= 1
        self.sums[k] = self.sums[k] - x
        self.z[i] = -1
        if self.counts[k] == 0:
            del self.counts[k], self.sums[k], self.thetas[k]
            self.z[self.z > k] -= 1

    def add(self, i: int, x: np.ndarray, k: int, theta: np.ndarray | None = None) -> None:
        if k == self.K:
            self.counts.append(0)
            self.sums.append(np.zeros_like(x))
            self.thetas.append(theta)
        self.counts[k] += 1
        self.sums[k] = self.sums[k] + x
        self.z[i] = k


def _data(model: DivergenceModel, data) -> np.ndarray:
    X = data.values if isinstance(data, DataMatrix) else np.asarray(data, dtype=float)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if not model.is_gaussian:
        bregman._check_counts(X)
    return X


def _log_ratios(p: float, q: float) -> tuple[float, float]:
    return math.log(p) - math.log1p(-q), math.log1p(-p) - math.log(q)


def log_assignment_weights(i: int, state: GibbsState, X: np.ndarray, E: SideInfo,
                           model: DivergenceModel, log_marg_i: float, alpha: float) -> np.ndarray:
    """Unnormalised log weights over the K existing clusters plus a new one.

    Instance ``i`` must already be removed from ``state``.
    """
    K = state.K
    out = np.empty(K + 1)
    if K:
        out[:K] = np.log(np.asarray(state.counts, dtype=float))
        out[:K] += bregman.log_likelihood(model, X[i], np.stack(state.thetas))
        if len(E):
            may, maynot = E.adjacency[i]
            a, b = _log_ratios(state.p, state.q)
            if may.size:
                out[:K] += a * np.bincount(state.z[may], minlength=K + 1)[:K]
            if maynot.size:
                out[:K] += b * np.bincount(state.z[maynot], minlength=K + 1)[:K]
    out[K] = math.log(alpha) + log_marg_i
    return out


def gibbs_assignment_weights(i: int, partition: Partition, data, E: SideInfo, model: DivergenceModel,
                             prior: PriorParams, cred: CredibilityParams, alpha: float,
                             thetas) -> np.ndarray:
    """Normalised K+1 assignment probabilities for instance ``i``.

    ``partition`` and ``thetas`` describe the other instances' clustering;
    ``i``'s own assignment is ignored (it is taken out before scoring).
    """
    X = _data(model, data)
    state = _state_from(partition, X, [np.asarray(t, dtype=float) for t in thetas], cred.p, cred.q)
    state.remove(i, X[i])
    lw = log_assignment_weights(i, state, X, E, model, bregman.log_marginal(model, prior, X[i]), alpha)
    w = np.exp(lw - lw.max())
    return w / w.sum()


def _state_from(partition: Partition, X: np.ndarray, thetas, p: float, q: float) -> GibbsState:
    z = partition.assignments.copy()
    K = partition.K
    sums = [X[z == k].sum(axis=0) for k in range(K)]
    return GibbsState(z, sums, list(map(int, partition.counts)), list(thetas), p, q)


def _draw(lw: np.ndarray, rng: np.random.Generator) -> int:
    w = np.exp(lw - lw.max())
    c = np.cumsum(w)
    return int(min(np.searchsorted(c, rng.random() * c[-1], side="right"), lw.size - 1))


def resample_credibility(E: SideInfo, partition: Partition | np.ndarray, cred: CredibilityParams,
                         rng: np.random.Generator) -> tuple[float, float]:
    """Conjugate Beta draws of (p, q) given the co-membership of linked pairs."""
    a_p, b_p, a_q, b_q = credibility_posterior(E, partition, cred)
    p = float(rng.beta(a_p, b_p))
    q = float(rng.beta(a_q, b_q))
    ceil = 1.0 - 1e-9
    return min(max(p, 1e-12), ceil), min(max(q, 1e-12), ceil)


def credibility_posterior(E: SideInfo, partition, cred: CredibilityParams) -> tuple[float, float, float, float]:
    """Beta posterior parameters (alpha_p, beta_p, alpha_q, beta_q)."""
    z = partition.assignments if isinstance(partition, Partition) else np.asarray(partition)
    i, j, v = E.arrays
    same = z[i] == z[j]
    may = v == 1
    n11 = int(np.count_nonzero(same & may))
    n01 = int(np.count_nonzero(same & ~may))
    n00 = int(np.count_nonzero(~same & ~may))
    n10 = int(np.count_nonzero(~same & may))
    return cred.alpha_p + n11, cred.beta_p + n01, cred.alpha_q + n00, cred.beta_q + n10


def side_info_loglik(E: SideInfo, z: np.ndarray, p: float, q: float) -> float:
    if not len(E):
        return 0.0
    i, j, v = E.arrays
    same = z[i] == z[j]
    may = v == 1
    return float(
        np.count_nonzero(same & may) * math.log(p)
        + np.count_nonzero(same & ~may) * math.log1p(-p)
        + np.count_nonzero(~same & ~may) * math.log(q)
        + np.count_nonzero(~same & may) * math.log1p(-q)
    )


def log_crp(counts, alpha: float) -> float:
    counts = np.asarray(counts, dtype=float)
    n = counts.sum()
    return float(len(counts) * math.log(alpha) + gammaln(counts).sum() + gammaln(alpha) - gammaln(alpha + n))


def log_joint(partition: Partition, X: np.ndarray, E: SideInfo, model: DivergenceModel,
              prior: PriorParams, alpha: float, p: float, q: float) -> float:
    """log p(z) + log p(x | z) + log p(E | z, p, q), cluster parameters integrated out."""
    z = partition.assignments
    ll = sum(bregman.log_marginal_cluster(model, prior, X[z == k]) for k in range(partition.K))
    return log_crp(partition.counts, alpha) + ll + side_info_loglik(E, z, p, q)


def gibbs_sweep(state: GibbsState, X: np.ndarray, E: SideInfo, model: DivergenceModel,
                prior: PriorParams, cfg: GibbsConfig, rng: np.random.Generator,
                log_marg: np.ndarray | None = None) -> GibbsState:
    """One pass of assignment updates followed by parameter redraws (in place)."""
    n = X.shape[0]
    if log_marg is None:
        log_marg = np.array([bregman.log_marginal(model, prior, X[i]) for i in range(n)])
    for i in range(n):
        x = X[i]
        state.remove(i, x)
        lw = log_assignment_weights(i, state, X, E, model, log_marg[i], cfg.alpha)
        k = _draw(lw, rng)
        theta = bregman.sample_posterior(model, prior, x, 1, rng) if k == state.K else None
        state.add(i, x, k, theta)
    for k in range(state.K):
        state.thetas[k] = bregman.sample_posterior(model, prior, state.sums[k], state.counts[k], rng)
    return state


def init_state(X: np.ndarray, model: DivergenceModel, prior: PriorParams, cred: CredibilityParams,
               rng: np.random.Generator) -> GibbsState:
    """All instances in one cluster, parameter drawn from its posterior."""
    n = X.shape[0]
    total = X.sum(axis=0)
    theta = bregman.sample_posterior(model, prior, total, n, rng)
    return GibbsState(np.zeros(n, dtype=np.int64), [total], [n], [theta], cred.p, cred.q)


def run_gibbs(data, E: SideInfo, model: DivergenceModel, prior: PriorParams | None,
              cfg: GibbsConfig) -> GibbsTrace:
    X = _data(model, data)
    n = X.shape[0]
    if E.n != n:
        raise ValueError(f"side info is over {E.n} instances, data has {n}")
    if prior is None:
        prior = bregman.default_prior(model, X)
    rng = np.random.default_rng(cfg.seed)
    cred = cfg.cred
    state = init_state(X, model, prior, cred, rng)
    log_marg = np.array([bregman.log_marginal(model, prior, X[i]) for i in range(n)])
    trace = GibbsTrace()
    for sweep in range(cfg.sweeps):
        gibbs_sweep(state, X, E, model, prior, cfg, rng, log_marg)
        part = state.partition()
        if cred.learn:
            state.p, state.q = resample_credibility(E, part, cred, rng)
        lj = log_joint(part, X, E, model, prior, cfg.alpha, state.p, state.q)
        trace.log_joint.append(lj)
        if sweep >= cfg.burn_in and (sweep - cfg.burn_in + 1) % cfg.thin == 0:
            trace.samples.append(part)
            trace.sample_log_joint.append(lj)
            trace.p_samples.append(state.p)
            trace.q_samples.append(state.q)
    return trace


def map_partition(trace: GibbsTrace) -> Partition:
    """Snapshot with the highest recorded log joint (first one wins ties)."""
    if not trace.samples:
        raise ValueError("trace has no samples")
    return trace.samples[int(np.argmax(trace.sample_log_joint))]
