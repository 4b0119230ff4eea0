"""External validity measures: pairwise F, adjusted Rand index, NMI."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import as_labels, compact_labels


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    counts: np.ndarray  # K_pred x K_true

    @classmethod
    def build(cls, pred, truth) -> "ContingencyTable":
        a = compact_labels(as_labels(pred))
        b = compact_labels(as_labels(truth))
        if a.size != b.size:
            raise ValueError(f"length mismatch: {a.size} vs {b.size}")
        table = np.zeros((a.max() + 1 if a.size else 0, b.max() + 1 if b.size else 0), dtype=np.int64)
        np.add.at(table, (a, b), 1)
        return cls(table)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def rows(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def cols(self) -> np.ndarray:
        return self.counts.sum(axis=0)


def _pairs(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.sum(x * (x - 1.0) / 2.0))


def pairwise_f(pred, truth) -> float:
    """Harmonic mean of pair-level precision and recall (0 when both vanish)."""
    t = ContingencyTable.build(pred, truth)
    both = _pairs(t.counts)
    same_pred = _pairs(t.rows)
    same_true = _pairs(t.cols)
    precision = both / same_pred if same_pred else 0.0
    recall = both / same_true if same_true else 0.0
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def adjusted_rand(pred, truth) -> float:
    t = ContingencyTable.build(pred, truth)
    if t.n < 2:
        raise ValueError("adjusted Rand index needs at least two instances")
    index = _pairs(t.counts)
    a, b = _pairs(t.rows), _pairs(t.cols)
    expected = a * b / _pairs([t.n])
    top = 0.5 * (a + b)
    if top == expected:
        # both partitions trivial in the same way
        return 1.0
    return (index - expected) / (top - expected)


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-np.sum(p * np.log(p)))


def nmi(pred, truth) -> float:
    """Mutual information over the geometric mean of the two entropies (nats)."""
    t = ContingencyTable.build(pred, truth)
    n = t.n
    h_pred = _entropy(t.rows, n)
    h_true = _entropy(t.cols, n)
    if h_pred == 0.0 and h_true == 0.0:
        return 1.0
    if h_pred == 0.0 or h_true == 0.0:
        return 0.0
    nz = t.counts > 0
    pij = t.counts[nz] / n
    outer = np.outer(t.rows, t.cols)[nz] / (n * n)
    mi = float(np.sum(pij * np.log(pij / outer)))
    return max(0.0, min(1.0, mi / np.sqrt(h_pred * h_true)))
