"""Deterministic clustering: RDP-means, DP-means, Lloyd K-means.

RDP-means assigns each point to the cluster with the smallest *augmented
distance* ``D(x, mu_k) - xi1 * f_k + xi2 * s_k`` (``f_k``/``s_k`` are the
may / may-not links into cluster k), or opens a new cluster at ``x`` when
every augmented distance is at least ``lam``. Constraint weights start at
``xi0`` and grow geometrically every iteration up to a cap.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import bregman
from .bregman import DivergenceModel
from .core import DataMatrix, Partition, RdpHyperParams, SideInfo, compact_labels

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RdpState:
    partition: Partition
    centers: np.ndarray
    xi1: float
    xi2: float
    iter: int = 0

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.centers, dtype=float))
        if c.shape[0] != self.partition.K:
            raise ValueError(f"{c.shape[0]} centers for {self.partition.K} clusters")
        object.__setattr__(self, "centers", c)


@dataclass(eq=False)
class RdpResult:
    partition: Partition
    centers: np.ndarray
    objectives: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False

    def __iter__(self):
        # allows ``part, centers, trace = rdp_means(...)``
        return iter((self.partition, self.centers, self.objectives))


class _Scorer:
    """Divergence of one point to a block of centers, with cached logs."""

    def __init__(self, model: DivergenceModel, X: np.ndarray):
        self.model = model
        self.X = X
        self.gauss = model.is_gaussian
        if not self.gauss:
            self.ent = bregman._xlogx(X).sum(axis=1)

    def start(self, centers: np.ndarray, capacity: int):
        C = np.empty((capacity, self.X.shape[1]))
        C[: len(centers)] = centers
        self.C = C
        if not self.gauss:
            if np.any(centers <= 0):
                raise ValueError("center has a zero coordinate; smooth the data first")
            L = np.empty_like(C)
            L[: len(centers)] = np.log(centers)
            self.L = L

    def add(self, k: int, i: int):
        self.C[k] = self.X[i]
        if not self.gauss:
            self.L[k] = np.log(self.X[i])

    def __call__(self, i: int, K: int) -> np.ndarray:
        x = self.X[i]
        if self.gauss:
            diff = self.C[:K] - x
            return np.einsum("kd,kd->k", diff, diff) / (2.0 * self.model.sigma2)
        return np.maximum(self.ent[i] - self.L[:K] @ x, 0.0)


def _as_array(model: DivergenceModel, data) -> np.ndarray:
    X = bregman.prepare(model, data)
    if X.shape[0] == 0:
        raise ValueError("no data")
    return X


def _means(X: np.ndarray, z: np.ndarray, K: int, model: DivergenceModel) -> np.ndarray:
    order = np.argsort(z, kind="stable")
    bounds = np.searchsorted(z[order], np.arange(K + 1))
    return np.stack([
        bregman.cluster_mean(model, X[order[bounds[k]:bounds[k + 1]]]) for k in range(K)
    ])


def augmented_distance(model: DivergenceModel, x, mu, f: int, s: int, xi1: float, xi2: float) -> float:
    if f < 0 or s < 0 or xi1 < 0 or xi2 < 0:
        raise ValueError("counts and weights must be nonnegative")
    return bregman.divergence(model, x, mu) - xi1 * f + xi2 * s


def _assign_pass(X, z, centers, E, xi1, xi2, lam, scorer, on_new=None):
    """One sequential sweep; mutates ``z``. Returns (z, pass centers)."""
    n = X.shape[0]
    K = centers.shape[0]
    scorer.start(centers, K + n)
    adj = E.adjacency if E is not None and len(E) else None
    for i in range(n):
        d = scorer(i, K)
        if adj is not None:
            may, maynot = adj[i]
            if xi1 and may.size:
                d -= xi1 * np.bincount(z[may], minlength=K)
            if xi2 and maynot.size:
                d += xi2 * np.bincount(z[maynot], minlength=K)
        k = int(np.argmin(d))
        if d[k] < lam:
            z[i] = k
        else:
            if on_new is not None:
                on_new(i, d.copy())
            scorer.add(K, i)
            z[i] = K
            K += 1
    return z, scorer.C[:K].copy()


def rdp_assign_step(state: RdpState, data, E: SideInfo, hp: RdpHyperParams,
                    model: DivergenceModel, on_new=None) -> RdpState:
    """Sequential assignment pass with the state's current weights.

    Friend / stranger counts use assignments already updated earlier in the
    pass. Clusters left empty are dropped (ids compacted in order); the
    surviving centers are returned as they stood during the pass, i.e. not
    yet re-averaged. ``on_new(i, aug_dists)`` is called whenever instance i
    opens a cluster.
    """
    X = _as_array(model, data)
    z = state.partition.assignments.copy()
    z, C = _assign_pass(X, z, state.centers, E, state.xi1, state.xi2, hp.lam,
                        _Scorer(model, X), on_new)
    used = np.unique(z)
    return RdpState(Partition(compact_labels(z)), C[used], state.xi1, state.xi2, state.iter + 1)


def objective(data, E: SideInfo | None, partition: Partition, centers, xi1: float, xi2: float,
              lam: float, model: DivergenceModel, per_pair: bool = False) -> float:
    """Penalised objective summed over members.

    Every member counts its own friends and strangers, so each linked pair
    inside a cluster contributes twice. ``per_pair=True`` counts each pair
    once instead; that variant is the one a sequential assignment pass is
    guaranteed not to increase.
    """
    return _objective(_as_array(model, data), E, partition, centers, xi1, xi2, lam, model, per_pair)


def _objective(X, E, partition, centers, xi1, xi2, lam, model, per_pair=False):
    z = partition.assignments
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    total = float(bregman.divergence_rows(model, X, centers[z]).sum())
    if E is not None and len(E):
        i, j, v = E.arrays
        same = z[i] == z[j]
        total += (1.0 if per_pair else 2.0) * (-xi1 * np.count_nonzero(same & (v == 1)) + xi2 * np.count_nonzero(same & (v == 0)))
    return total + lam * partition.K


def rdp_means(data, E: SideInfo | None, hp: RdpHyperParams, model: DivergenceModel) -> RdpResult:
    X = _as_array(model, data)
    n = X.shape[0]
    if E is not None and E.n != n:
        raise ValueError(f"side info is over {E.n} instances, data has {n}")
    scorer = _Scorer(model, X)
    z = np.zeros(n, dtype=np.int64)
    centers = bregman.cluster_mean(model, X)[None, :]
    xi = hp.xi0
    cap = hp.cap
    objectives: list[float] = []
    stable = 0
    it = 0
    converged = False
    while it < hp.max_iters:
        it += 1
        xi1, xi2 = hp.xi1_xi2_ratio * xi, xi
        prev = z.copy()
        z, _ = _assign_pass(X, z, centers, E, xi1, xi2, hp.lam, scorer)
        z = compact_labels(z)
        K = int(z.max()) + 1
        centers = _means(X, z, K, model)
        part = Partition(z)
        objectives.append(_objective(X, E, part, centers, xi1, xi2, hp.lam, model))
        xi = min(xi * hp.xi_rate, cap)
        if np.array_equal(prev, z):
            stable += 1
            if stable >= hp.stable_iters:
                converged = True
                break
        else:
            stable = 0
    log.debug("rdp_means: %d iterations, K=%d", it, centers.shape[0])
    return RdpResult(Partition(z), centers, objectives, it, converged)


def dp_means(data, hp: RdpHyperParams, model: DivergenceModel) -> tuple[Partition, np.ndarray]:
    """DP-means: nonparametric K-means with new-cluster penalty ``hp.lam``.

    Runs until the assignments reach a fixed point or ``hp.max_iters``.
    """
    X = _as_array(model, data)
    n = X.shape[0]
    scorer = _Scorer(model, X)
    z = np.zeros(n, dtype=np.int64)
    centers = bregman.cluster_mean(model, X)[None, :]
    for _ in range(hp.max_iters):
        prev = z.copy()
        K = centers.shape[0]
        scorer.start(centers, K + n)
        for i in range(n):
            d = scorer(i, K)
            k = int(np.argmin(d))
            if d[k] < hp.lam:
                z[i] = k
            else:
                scorer.add(K, i)
                z[i] = K
                K += 1
        z = compact_labels(z)
        centers = _means(X, z, int(z.max()) + 1, model)
        if np.array_equal(prev, z):
            break
    return Partition(z), centers


def kmeans(data, k: int, model: DivergenceModel, seed: int | None = None,
           max_iter: int = 300) -> tuple[Partition, np.ndarray]:
    """Lloyd iterations under the model divergence, seeded with k distinct points."""
    X = _as_array(model, data)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    centers = X[rng.choice(n, size=k, replace=False)].copy()
    z = None
    for _ in range(max_iter):
        new = np.argmin(bregman.divergence_matrix(model, X, centers), axis=1)
        if z is not None and np.array_equal(new, z):
            break
        z = new
        for c in range(k):
            members = X[z == c]
            if members.shape[0]:  # empty clusters keep their old center
                centers[c] = bregman.cluster_mean(model, members)
    part = Partition(compact_labels(z))
    return part, _means(X, part.assignments, part.K, model)


def lambda_kth_furthest(data, k: int, model: DivergenceModel) -> float:
    """Farthest-first traversal seeded at the global mean.

    Points are added greedily by largest distance to the current set;
    the returned lambda is the max-min distance found at the k-th step.
    """
    X = _as_array(model, data)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    mind = bregman.divergence_rows(model, X, bregman.cluster_mean(model, X))
    val = 0.0
    for step in range(k):
        j = int(np.argmax(mind))
        val = float(mind[j])
        if step < k - 1:
            mind = np.minimum(mind, bregman.divergence_rows(model, X, X[j]))
    return val
