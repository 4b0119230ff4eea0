"""Constraint sampling from ground truth, plus synthetic datasets.

Patterns (2-d, labels in generation order; ``t`` evenly spaced, noise is
isotropic N(0, noise_sd^2) added afterwards):

* ``blobs``       two point clouds centred at (-2, 0) and (2, 0)
* ``moons``       (cos t, sin t) and (1 - cos t, 0.5 - sin t), t in [0, pi]
* ``circles``     radius 1 and radius 0.5 circles, t in [0, 2 pi)
* ``elongated``   three horizontal bars x = 6 u - 3, y = 1.5 k, u in [0, 1]
* ``spirals``     (t cos(t + k pi), t sin(t + k pi)) / pi, t in [pi/2, 3 pi]
* ``aggregation`` four clouds of sizes 4:3:2:1 and spreads 1 : 0.7 : 0.5 : 0.3
                  around (0,0), (3.2,0), (0,4), (4,4); the first two touch

These are stand-ins for the hand-drawn 2-d benchmarks, not reproductions.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import MAY, MAY_NOT, DataMatrix, Kind, SideInfo

PATTERNS = ("blobs", "moons", "circles", "elongated", "spirals", "aggregation")
_N_CLUSTERS = {"blobs": 2, "moons": 2, "circles": 2, "elongated": 3, "spirals": 2, "aggregation": 4}


@dataclass(frozen=True)
class NoiseSpec:
    r: float = 0.05
    p: float = 1.0
    q: float | None = None  # None -> same as p
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.r <= 1.0:
            raise ValueError("r must lie in [0, 1]")
        q = self.p if self.q is None else self.q
        if not (0.0 < self.p <= 1.0 and 0.0 < q <= 1.0):
            raise ValueError("p and q must lie in (0, 1]")
        object.__setattr__(self, "q", float(q))


def n_constraints(n: int, r: float) -> int:
    return int(np.floor(r * n * (n - 1) / 2 + 1e-9))


def sample_constraints(labels, spec: NoiseSpec) -> SideInfo:
    """Sample ``floor(r * n(n-1)/2)`` distinct pairs and label them noisily.

    A same-label pair reads may with probability ``p``; a different-label
    pair reads may-not with probability ``q``.
    """
    labels = np.asarray(labels).reshape(-1)
    n = labels.size
    m = n_constraints(n, spec.r)
    if m == 0:
        return SideInfo(n)
    rng = np.random.default_rng(spec.seed)
    I, J = np.triu_indices(n, 1)
    idx = np.sort(rng.choice(I.size, size=m, replace=False))
    i, j = I[idx], J[idx]
    same = labels[i] == labels[j]
    u = rng.random(m)
    v = np.where(same, np.where(u < spec.p, MAY, MAY_NOT), np.where(u < spec.q, MAY_NOT, MAY))
    return SideInfo.from_arrays(n, i, j, v)


def _split(n: int, weights) -> list[int]:
    w = np.asarray(weights, dtype=float)
    sizes = np.floor(n * w / w.sum()).astype(int)
    sizes[: n - sizes.sum()] += 1
    return sizes.tolist()


def gen_pattern(name: str, n: int = 300, noise_sd: float = 0.05, seed: int = 0):
    """2-d synthetic dataset with ground-truth labels. See module docs."""
    if name not in _N_CLUSTERS:
        raise ValueError(f"unknown pattern {name!r}; choose from {PATTERNS}")
    k = _N_CLUSTERS[name]
    if n < 2 * k:
        raise ValueError(f"pattern {name!r} needs n >= {2 * k}")
    rng = np.random.default_rng(seed)
    parts = []
    if name == "aggregation":
        sizes = _split(n, [4, 3, 2, 1])
    else:
        sizes = _split(n, [1] * k)
    for c, m in enumerate(sizes):
        if name == "blobs":
            pts = np.tile([-2.0 if c == 0 else 2.0, 0.0], (m, 1))
        elif name == "moons":
            t = np.linspace(0, np.pi, m)
            pts = (np.c_[np.cos(t), np.sin(t)] if c == 0
                   else np.c_[1 - np.cos(t), 0.5 - np.sin(t)])
        elif name == "circles":
            t = np.linspace(0, 2 * np.pi, m, endpoint=False)
            radius = 1.0 if c == 0 else 0.5
            pts = radius * np.c_[np.cos(t), np.sin(t)]
        elif name == "elongated":
            u = np.linspace(0, 1, m)
            pts = np.c_[6 * u - 3, np.full(m, 1.5 * c)]
        elif name == "spirals":
            t = np.linspace(np.pi / 2, 3 * np.pi, m)
            pts = np.c_[t * np.cos(t + c * np.pi), t * np.sin(t + c * np.pi)] / np.pi
        else:
            centres = [(0, 0), (3.2, 0), (0, 4), (4, 4)]
            spread = [1.0, 0.7, 0.5, 0.3][c]
            pts = np.asarray(centres[c], dtype=float) + spread * rng.standard_normal((m, 2))
        parts.append(pts)
    X = np.vstack(parts)
    if noise_sd > 0:
        X = X + noise_sd * rng.standard_normal(X.shape)
    labels = np.repeat(np.arange(k), sizes)
    return DataMatrix(X, Kind.REAL), labels


def gen_topic_counts(n_topics: int = 10, docs_per_topic: int = 100, vocab: int = 1000,
                     mean_length: float = 3000.0, topic_weight: float = 0.5,
                     doc_concentration: float = 500.0, length_sd: float = 0.8,
                     seed: int = 0):
    """Bag-of-words style count data with latent topics.

    Each topic's word distribution mixes a shared background (weight
    ``1 - topic_weight``) with a sparse topic-specific Dirichlet(0.05) draw.
    Every document perturbs its topic distribution with a
    Dirichlet(``doc_concentration`` * topic) draw, and its length is
    log-normal around ``mean_length`` (log-scale sd ``length_sd``), so raw
    count vectors vary widely in scale while their normalised profiles do not.
    """
    rng = np.random.default_rng(seed)
    background = rng.dirichlet(np.ones(vocab))
    topics = np.stack([
        (1 - topic_weight) * background + topic_weight * rng.dirichlet(np.full(vocab, 0.05))
        for _ in range(n_topics)
    ])
    n = n_topics * docs_per_topic
    labels = np.repeat(np.arange(n_topics), docs_per_topic)
    lengths = np.maximum(10, np.round(mean_length * rng.lognormal(0.0, length_sd, size=n))).astype(int)
    X = np.empty((n, vocab))
    for i in range(n):
        g = rng.gamma(doc_concentration * topics[labels[i]] + 1e-3)
        X[i] = rng.multinomial(lengths[i], g / g.sum())
    return DataMatrix(X, Kind.COUNTS), labels
