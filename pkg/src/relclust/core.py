"""Shared value types: data, pairwise side information, partitions, hyperparameters."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

MAY = 1
MAY_NOT = 0


class Kind(str, Enum):
    REAL = "real"
    COUNTS = "counts"


@dataclass(frozen=True, eq=False)
class DataMatrix:
    """n x d observations. ``kind=COUNTS`` marks nonnegative count rows."""

    values: np.ndarray
    kind: Kind = Kind.REAL

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError(f"expected a non-empty 2-d array, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("data contains non-finite values")
        kind = Kind(self.kind)
        if kind is Kind.COUNTS and np.any(v < 0):
            raise ValueError("count data must be nonnegative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "kind", kind)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class SideInfo:
    """Sparse symmetric may / may-not relation over ``n`` instances.

    Keys are unordered pairs stored as ``(i, j)`` with ``i < j``; a missing
    pair means no information.
    """

    n: int
    entries: Mapping[tuple[int, int], int] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        clean: dict[tuple[int, int], int] = {}
        for (a, b), v in self.entries.items():
            a, b = int(a), int(b)
            if a == b:
                raise ValueError(f"self-link ({a}, {a}) is not allowed")
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise IndexError(f"pair ({a}, {b}) out of range for n={self.n}")
            if v not in (MAY, MAY_NOT):
                raise ValueError(f"link value must be 0 or 1, got {v!r}")
            key = (a, b) if a < b else (b, a)
            if key in clean and clean[key] != v:
                raise ValueError(f"conflicting values for pair {key}")
            clean[key] = int(v)
        object.__setattr__(self, "entries", clean)

    @classmethod
    def from_arrays(cls, n: int, i: Iterable[int], j: Iterable[int], v: Iterable[int]) -> "SideInfo":
        return cls(n, {(int(a), int(b)): int(c) for a, b, c in zip(i, j, v)})

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, i: int, j: int):
        """Link value for the pair, or ``None`` when unknown."""
        key = (i, j) if i < j else (j, i)
        return self.entries.get(key)

    @cached_property
    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(i, j, value) as parallel int arrays, sorted by pair."""
        keys = sorted(self.entries)
        if not keys:
            e = np.zeros(0, dtype=np.int64)
            return e, e.copy(), e.copy()
        ij = np.array(keys, dtype=np.int64)
        vals = np.array([self.entries[k] for k in keys], dtype=np.int64)
        return ij[:, 0], ij[:, 1], vals

    @cached_property
    def adjacency(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Per instance: (may-linked neighbours, may-not-linked neighbours)."""
        may: list[list[int]] = [[] for _ in range(self.n)]
        maynot: list[list[int]] = [[] for _ in range(self.n)]
        for (a, b), v in self.entries.items():
            target = may if v == MAY else maynot
            target[a].append(b)
            target[b].append(a)
        return [
            (np.array(sorted(m), dtype=np.int64), np.array(sorted(s), dtype=np.int64))
            for m, s in zip(may, maynot)
        ]

    def degree(self, i: int) -> int:
        m, s = self.adjacency[i]
        return len(m) + len(s)


def compact_labels(z: Iterable[int]) -> np.ndarray:
    """Relabel ids to 0..K-1, keeping the relative order of surviving ids."""
    z = np.asarray(z, dtype=np.int64)
    if z.size == 0:
        return z.copy()
    uniq, inv = np.unique(z, return_inverse=True)
    return inv.astype(np.int64).reshape(z.shape)


def encode_labels(labels: Iterable) -> np.ndarray:
    """Factor-encode arbitrary labels to 0..K-1 by order of first appearance."""
    mapping: dict = {}
    out = []
    for lab in labels:
        if lab not in mapping:
            mapping[lab] = len(mapping)
        out.append(mapping[lab])
    return np.array(out, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class Partition:
    """Assignment of n instances into K non-empty clusters labelled 0..K-1."""

    assignments: np.ndarray

    def __post_init__(self):
        z = np.array(self.assignments, dtype=np.int64).reshape(-1)
        if z.size and z.min() < 0:
            raise ValueError("cluster ids must be nonnegative")
        k = int(z.max()) + 1 if z.size else 0
        counts = np.bincount(z, minlength=k)
        if np.any(counts == 0):
            raise ValueError("cluster ids must be dense 0..K-1; use Partition.compact")
        z.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "assignments", z)
        object.__setattr__(self, "_counts", counts)

    @classmethod
    def compact(cls, z: Iterable[int]) -> "Partition":
        return cls(compact_labels(z))

    @property
    def counts(self) -> np.ndarray:
        return self._counts

    @property
    def n(self) -> int:
        return self.assignments.size

    @property
    def K(self) -> int:
        return self._counts.size

    def members(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == k)

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return np.array_equal(self.assignments, other.assignments)

    def __hash__(self):
        return hash(self.assignments.tobytes())

    def __repr__(self):
        return f"Partition({self.assignments.tolist()})"


def as_labels(x) -> np.ndarray:
    if isinstance(x, Partition):
        return x.assignments
    return np.asarray(x).reshape(-1)


_PQ_CEIL = 1.0 - 1e-9


@dataclass(frozen=True)
class CredibilityParams:
    """Credibility of the side information.

    ``p`` is P(may | same cluster) and ``q`` is P(may-not | different
    clusters). With ``learn=True`` both are resampled from their Beta
    posteriors every sweep. Values of exactly 1 are pulled to 1 - 1e-9 so the
    log ratios stay finite.
    """

    p: float = 0.9
    q: float = 0.9
    learn: bool = True
    alpha_p: float = 9.0
    beta_p: float = 1.0
    alpha_q: float = 9.0
    beta_q: float = 1.0

    def __post_init__(self):
        for name in ("p", "q"):
            v = float(getattr(self, name))
            if not (0.0 < v <= 1.0):
                raise ValueError(f"{name} must lie in (0, 1], got {v}")
            object.__setattr__(self, name, min(v, _PQ_CEIL))
        for name in ("alpha_p", "beta_p", "alpha_q", "beta_q"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class RdpHyperParams:
    lam: float
    xi0: float = 0.001
    xi_rate: float = 2.0
    xi1_xi2_ratio: float = 1.0
    max_iters: int = 500
    stable_iters: int = 20
    xi_cap: float | None = None  # None -> 1e6 * xi0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if self.xi0 < 0 or self.xi_rate < 1 or self.xi1_xi2_ratio <= 0:
            raise ValueError("need xi0 >= 0, xi_rate >= 1, xi1_xi2_ratio > 0")
        if not (self.max_iters >= self.stable_iters >= 1):
            raise ValueError("need max_iters >= stable_iters >= 1")
        if self.xi_cap is not None and self.xi_cap < 0:
            raise ValueError("xi_cap must be nonnegative")

    @property
    def cap(self) -> float:
        return 1e6 * self.xi0 if self.xi_cap is None else float(self.xi_cap)


def friend_stranger_counts(i: int, part: Partition | np.ndarray, E: SideInfo, K: int | None = None):
    """Per-cluster (friends, strangers) of instance ``i``.

    Returns two length-K integer arrays: ``f[k]`` counts may-links from ``i``
    into cluster k, ``s[k]`` counts may-not links. ``i`` itself never counts.
    """
    z = as_labels(part)
    if z.size != E.n:
        raise ValueError(f"partition has {z.size} instances, side info has {E.n}")
    if not 0 <= i < E.n:
        raise IndexError(f"instance {i} out of range for n={E.n}")
    if K is None:
        K = int(z.max()) + 1 if z.size else 0
    may, maynot = E.adjacency[i]
    f = np.bincount(z[may], minlength=K)
    s = np.bincount(z[maynot], minlength=K)
    return f, s
