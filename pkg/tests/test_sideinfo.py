import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from relclust import metrics, rdp
from relclust.bregman import DivergenceModel
from relclust.core import MAY, MAY_NOT, Kind, RdpHyperParams
from relclust.sideinfo import PATTERNS, NoiseSpec, gen_pattern, gen_topic_counts, sample_constraints

from conftest import labelings


def test_zero_rate_is_empty():
    assert len(sample_constraints(np.array([0, 1, 0, 1]), NoiseSpec(0.0))) == 0


def test_full_noiseless_sample_is_ground_truth():
    y = np.array([0, 0, 1, 2, 1, 0])
    E = sample_constraints(y, NoiseSpec(1.0, 1.0, 1.0))
    assert len(E) == 15
    for (i, j), v in E.entries.items():
        assert v == (MAY if y[i] == y[j] else MAY_NOT)


@given(labelings(max_n=40), st.floats(0, 1), st.floats(0.05, 1), st.integers(0, 10**6))
def test_sample_size_and_pairs(y, r, p, seed):
    n = y.size
    E = sample_constraints(y, NoiseSpec(r, p, seed=seed))
    assert len(E) == int(np.floor(r * n * (n - 1) / 2 + 1e-9))
    assert all(i < j for i, j in E.entries)  # unordered, no self-pairs, keys unique by construction


@given(labelings(max_n=30), st.floats(0, 1), st.integers(0, 1000))
def test_noiseless_entries_agree_with_truth(y, r, seed):
    E = sample_constraints(y, NoiseSpec(r, 1.0, seed=seed))
    assert all(v == (y[i] == y[j]) for (i, j), v in E.entries.items())


def test_flip_rates_match_credibility():
    # n=100 balanced, r=0.05, p=0.8, q=1 over 1000 seeds
    y = np.repeat([0, 1], 50)
    same_flips = same_total = diff_flips = 0
    for seed in range(1000):
        i, j, v = sample_constraints(y, NoiseSpec(0.05, 0.8, 1.0, seed=seed)).arrays
        same = y[i] == y[j]
        same_flips += int(np.sum(same & (v == MAY_NOT)))
        same_total += int(same.sum())
        diff_flips += int(np.sum(~same & (v == MAY)))
    assert stats.binomtest(same_flips, same_total, 0.2).pvalue > 0.01
    assert diff_flips == 0


def test_flip_rates_for_both_sides():
    y = np.repeat([0, 1, 2], 20)
    counts = np.zeros(4, dtype=int)  # same-flip, same, diff-flip, diff
    for seed in range(300):
        i, j, v = sample_constraints(y, NoiseSpec(0.1, 0.9, 0.7, seed=seed)).arrays
        same = y[i] == y[j]
        counts += [np.sum(same & (v == 0)), same.sum(), np.sum(~same & (v == 1)), (~same).sum()]
    assert stats.binomtest(int(counts[0]), int(counts[1]), 0.1).pvalue > 0.01
    assert stats.binomtest(int(counts[2]), int(counts[3]), 0.3).pvalue > 0.01


def test_noise_spec_validation():
    with pytest.raises(ValueError):
        NoiseSpec(r=1.5)
    with pytest.raises(ValueError):
        NoiseSpec(p=0.0)
    assert NoiseSpec(p=0.8).q == 0.8


def test_blobs_zero_noise_are_point_masses():
    data, y = gen_pattern("blobs", 40, 0.0, seed=0)
    assert len(np.unique(data.values[y == 0], axis=0)) == 1
    assert len(np.unique(data.values[y == 1], axis=0)) == 1
    part, _ = rdp.kmeans(data, 2, DivergenceModel.gaussian(), seed=0)
    assert metrics.adjusted_rand(part, y) == 1.0


def test_circles_zero_noise_radii():
    data, y = gen_pattern("circles", 60, 0.0, seed=0)
    radii = np.linalg.norm(data.values, axis=1)
    np.testing.assert_allclose(radii[y == 0], 1.0, atol=1e-12)
    np.testing.assert_allclose(radii[y == 1], 0.5, atol=1e-12)


@pytest.mark.parametrize("name", PATTERNS)
def test_patterns_are_seeded_and_sized(name):
    a, ya = gen_pattern(name, 50, 0.1, seed=3)
    b, yb = gen_pattern(name, 50, 0.1, seed=3)
    assert a.n == 50 and a.d == 2
    np.testing.assert_array_equal(a.values, b.values)
    np.testing.assert_array_equal(ya, yb)
    with pytest.raises(ValueError):
        gen_pattern(name, 1, 0.1)


def test_unknown_pattern():
    with pytest.raises(ValueError):
        gen_pattern("stars", 50)


def test_moons_constraints_beat_kmeans():
    data, y = gen_pattern("moons", 200, 0.05, seed=0)
    g = DivergenceModel.gaussian()
    km, _ = rdp.kmeans(data, 2, g, seed=0)
    E = sample_constraints(y, NoiseSpec(0.01, 1.0, seed=0))
    res = rdp.rdp_means(data, E, RdpHyperParams(rdp.lambda_kth_furthest(data, 2, g)), g)
    assert metrics.adjusted_rand(km, y) < metrics.adjusted_rand(res.partition, y)


def test_topic_counts_shape():
    data, y = gen_topic_counts(n_topics=3, docs_per_topic=5, vocab=50, seed=1)
    assert data.kind is Kind.COUNTS and data.values.shape == (15, 50)
    assert np.all(data.values == np.round(data.values)) and np.all(data.values.sum(axis=1) >= 10)
    assert np.bincount(y).tolist() == [5, 5, 5]
