import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from relclust import metrics
from relclust.metrics import ContingencyTable

from conftest import labelings
from oracles import pair_counts


def test_f_examples():
    assert metrics.pairwise_f([0, 0, 1, 1], [0, 0, 1, 1]) == 1.0
    assert metrics.pairwise_f([0, 1, 2, 3], [0, 0, 1, 1]) == 0.0
    assert metrics.pairwise_f([0, 0, 1, 1], [0, 0, 0, 1]) == pytest.approx(0.4)


def test_ari_examples():
    assert metrics.adjusted_rand([0, 0, 1, 1, 2], [0, 0, 1, 1, 2]) == 1.0
    assert metrics.adjusted_rand([2, 2, 0, 0, 1], [0, 0, 1, 1, 2]) == 1.0
    assert metrics.adjusted_rand([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(-0.5)
    with pytest.raises(ValueError):
        metrics.adjusted_rand([0], [0])


def test_nmi_examples():
    assert metrics.nmi([0, 0, 1, 1, 2], [1, 1, 0, 0, 2]) == pytest.approx(1.0)
    assert metrics.nmi([0, 0, 0, 0], [0, 0, 1, 1]) == 0.0
    assert metrics.nmi([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(0.0, abs=1e-15)
    assert metrics.nmi([0, 0, 0], [1, 1, 1]) == 1.0


def test_length_mismatch():
    for fn in (metrics.pairwise_f, metrics.adjusted_rand, metrics.nmi):
        with pytest.raises(ValueError):
            fn([0, 1], [0, 1, 1])


def test_contingency_marginals():
    t = ContingencyTable.build([0, 0, 1, 2, 2, 2], [1, 0, 0, 1, 1, 0])
    assert t.n == 6 and t.counts.sum() == 6
    assert t.rows.tolist() == [2, 1, 3] and t.cols.tolist() == [3, 3]


def brute_f(a, b):
    both, sa, sb, _ = pair_counts(a, b)
    P = both / sa if sa else 0.0
    R = both / sb if sb else 0.0
    return 0.0 if P + R == 0 else 2 * P * R / (P + R)


def brute_ari(a, b):
    both, sa, sb, total = pair_counts(a, b)
    expected = sa * sb / total
    top = (sa + sb) / 2
    return 1.0 if top == expected else (both - expected) / (top - expected)


def brute_nmi(a, b):
    n = len(a)
    ha = -sum(c / n * math.log(c / n) for c in np.unique(a, return_counts=True)[1])
    hb = -sum(c / n * math.log(c / n) for c in np.unique(b, return_counts=True)[1])
    if ha == 0 and hb == 0:
        return 1.0
    if ha == 0 or hb == 0:
        return 0.0
    mi = 0.0
    for u in set(a):
        for v in set(b):
            nuv = sum(1 for x, y in zip(a, b) if x == u and y == v)
            if nuv:
                mi += nuv / n * math.log(n * nuv / (list(a).count(u) * list(b).count(v)))
    return mi / math.sqrt(ha * hb)


@given(st.data())
def test_metrics_match_brute_force(data):
    a = data.draw(labelings(max_n=50, max_k=6))
    b = np.array(data.draw(st.lists(st.integers(0, 5), min_size=a.size, max_size=a.size)))
    assert metrics.pairwise_f(a, b) == pytest.approx(brute_f(a, b), abs=1e-12)
    assert metrics.adjusted_rand(a, b) == pytest.approx(brute_ari(a, b), abs=1e-12)
    assert metrics.nmi(a, b) == pytest.approx(brute_nmi(a, b), abs=1e-12)


@given(st.data())
def test_metrics_ignore_relabelling(data):
    a = data.draw(labelings(max_n=40))
    b = data.draw(labelings(min_n=a.size, max_n=a.size))
    perm = np.array(data.draw(st.permutations(range(10))))
    for fn in (metrics.pairwise_f, metrics.adjusted_rand, metrics.nmi):
        assert fn(perm[a], b) == pytest.approx(fn(a, b), abs=1e-12)
        assert fn(a, perm[b]) == pytest.approx(fn(a, b), abs=1e-12)


def test_ari_of_independent_partitions_centres_on_zero():
    rng = np.random.default_rng(0)
    vals = [metrics.adjusted_rand(rng.integers(0, 4, 100), rng.integers(0, 4, 100)) for _ in range(1000)]
    assert abs(np.mean(vals)) < 0.02


@given(st.data())
def test_ranges(data):
    a = data.draw(labelings())
    b = data.draw(labelings(min_n=a.size, max_n=a.size))
    assert 0 <= metrics.pairwise_f(a, b) <= 1
    assert -1 < metrics.adjusted_rand(a, b) <= 1 + 1e-12
    assert 0 <= metrics.nmi(a, b) <= 1
