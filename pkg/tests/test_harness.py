import io
import json
from dataclasses import replace

import numpy as np
import pytest

from relclust import harness, rdp
from relclust.bregman import DivergenceModel
from relclust.harness import (CSV_HEADER, ConfigError, RunConfig, SkippedCell, emit, load_csv,
                              load_dataset, run_experiment, run_sweep, sweep_grid)

FAST = RunConfig(dataset="iris", algorithm="rdp_means", r=0.05, deviation=0, trials=2, seed=3)


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


# -- load_csv ---------------------------------------------------------------

def test_load_csv_three_rows(tmp_path):
    data, y = load_csv(write(tmp_path, "1,2,a\n3,4,a\n5,6,b"), label_column=2)
    np.testing.assert_array_equal(data.values, [[1, 2], [3, 4], [5, 6]])
    assert y.tolist() == [0, 0, 1]


def test_load_csv_labels_first_appearance(tmp_path):
    _, y = load_csv(write(tmp_path, "1,z\n2,a\n3,z\n4,m\n"), label_column=-1)
    assert y.tolist() == [0, 1, 0, 2]


def test_load_csv_header_detected(tmp_path):
    data, y = load_csv(write(tmp_path, "x,y,class\n1,2,a\n3,4,b\n"), label_column=2)
    assert data.values.shape == (2, 2)
    assert y.tolist() == [0, 1]


def test_load_csv_ragged_row_names_line(tmp_path):
    with pytest.raises(ValueError, match="line 3"):
        load_csv(write(tmp_path, "1,2,a\n3,4,a\n5,b\n"), label_column=2)


def test_load_csv_non_numeric_cell(tmp_path):
    with pytest.raises(ValueError, match="line 2.*'oops'"):
        load_csv(write(tmp_path, "1,2,a\n3,oops,a\n"), label_column=2)


def test_load_csv_empty(tmp_path):
    with pytest.raises(ValueError, match="empty"):
        load_csv(write(tmp_path, "\n\n"))


def test_load_csv_standardize(tmp_path):
    data, _ = load_csv(write(tmp_path, "1,10\n2,10\n3,10\n"), standardize=True)
    np.testing.assert_allclose(data.values.mean(axis=0), 0, atol=1e-15)
    np.testing.assert_allclose(data.values[:, 0].std(), 1.0)
    np.testing.assert_array_equal(data.values[:, 1], 0.0)  # constant column is only centred


def test_iris_shape():
    data, y = load_dataset("iris", standardize=False)
    assert data.values.shape == (150, 4)
    assert np.bincount(y).tolist() == [50, 50, 50]


@pytest.mark.parametrize("name,n,d,k", [("wine", 178, 13, 3), ("ecoli", 336, 7, 8),
                                          ("glass", 214, 9, 6), ("balance", 625, 4, 3)])
def test_bundled_shapes(name, n, d, k):
    data, y = load_dataset(name)
    assert data.values.shape == (n, d)
    assert y.max() + 1 == k
    np.testing.assert_allclose(data.values.mean(axis=0), 0, atol=1e-10)


def test_unknown_dataset():
    with pytest.raises(ConfigError, match="unknown dataset"):
        load_dataset("no-such-thing")


# -- configuration ----------------------------------------------------------

def test_config_from_dict_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="bogus"):
        RunConfig.from_dict({"bogus": 1})


@pytest.mark.parametrize("changes", [
    {"k": 3, "deviation": 0},
    {"deviation": None},
    {"algorithm": "nope"},
    {"model": "poisson"},
    {"trials": 0},
    {"p": 0.0},
    {"r": 1.5},
    {"k": 0, "deviation": None},
    {"xi_rate": 0.5},
])
def test_config_errors_before_work(changes):
    with pytest.raises(ConfigError):
        run_experiment(replace(FAST, **changes))


def test_tvclust_needs_no_k():
    replace(FAST, algorithm="tvclust", deviation=None).validate()


def test_multinomial_rejects_negative_features(tmp_path):
    p = write(tmp_path, "-1,2,a\n3,4,b\n5,6,a\n")
    with pytest.raises(ConfigError, match="nonnegative"):
        run_experiment(RunConfig(dataset=str(p), model="multinomial", k=2, trials=1))


def test_nonpositive_effective_k_is_skipped():
    with pytest.raises(SkippedCell):
        run_experiment(replace(FAST, deviation=3))


# -- run_experiment ---------------------------------------------------------

def test_single_trial_aggregate():
    res = run_experiment(replace(FAST, trials=1))
    t = res.trials[0]
    assert res.mean == {"F": t.F, "ARI": t.ARI, "NMI": t.NMI, "K_found": t.K_found}


def test_aggregate_is_mean():
    res = run_experiment(replace(FAST, trials=3))
    assert res.mean["F"] == pytest.approx(np.mean([t.F for t in res.trials]), abs=1e-15)
    assert [t.seed for t in res.trials] == [3, 4, 5]


def test_deterministic_bytes():
    a, b = run_experiment(FAST), run_experiment(FAST)
    assert a == b
    assert emit([a], "csv") == emit([b], "csv")
    assert emit([a], "json") == emit([b], "json")


def test_lambda_at_zero_deviation_is_kth_furthest():
    res = run_experiment(replace(FAST, trials=1))
    data, _ = load_dataset("iris")
    assert res.trials[0].lam == rdp.lambda_kth_furthest(data, 3, DivergenceModel.gaussian(0.5))


def test_deviation_shifts_k():
    data, _ = load_dataset("iris")
    res = run_experiment(replace(FAST, deviation=-2, trials=1))
    assert res.trials[0].lam == rdp.lambda_kth_furthest(data, 5, DivergenceModel.gaussian(0.5))


@pytest.mark.parametrize("algorithm", ["kmeans", "dp_means", "tvclust"])
def test_other_algorithms_score(algorithm):
    cfg = replace(FAST, algorithm=algorithm, trials=1, sweeps=40, burn_in=20, thin=2)
    if algorithm == "tvclust":
        cfg = replace(cfg, deviation=None)
    t = run_experiment(cfg).trials[0]
    assert 0.0 <= t.F <= 1.0 and 0.0 <= t.NMI <= 1.0
    assert t.K_found >= 1


def test_spectral_reports_k_only():
    t = run_experiment(replace(FAST, dataset="blobs", n_pattern=40, algorithm="spectral", trials=1)).trials[0]
    assert np.isnan(t.F) and t.K_found >= 1
    rec = harness.records([run_experiment(replace(FAST, dataset="blobs", n_pattern=40,
                                                  algorithm="spectral", trials=1))])[0]
    assert rec["F"] is None


def test_iris_rdp_near_reported_regime():
    res = run_experiment(RunConfig(dataset="iris", algorithm="rdp_means", r=0.05, p=1.0,
                                   deviation=0, trials=5, seed=0))
    assert abs(res.mean["F"] - 0.96) <= 0.10


# -- sweeps -----------------------------------------------------------------

def test_one_cell_grid_equals_run_experiment():
    grid = sweep_grid(FAST)
    assert grid == [FAST]
    cells = run_sweep(grid, workers=1)
    assert len(cells) == 1 and cells[0].result == run_experiment(FAST)


def test_table_grid_cardinality():
    grid = sweep_grid(FAST, p=[1, 0.95, 0.9, 0.8], r=[0.01, 0.03, 0.05])
    assert len(grid) == 12
    assert {(c.r, c.p) for c in grid} == {(r, p) for r in (0.01, 0.03, 0.05) for p in (1, 0.95, 0.9, 0.8)}


def test_grid_order_dataset_major():
    grid = sweep_grid(FAST, dataset=["iris", "wine"], algorithm=["kmeans", "rdp_means"])
    assert [(c.dataset, c.algorithm) for c in grid] == [
        ("iris", "kmeans"), ("iris", "rdp_means"), ("wine", "kmeans"), ("wine", "rdp_means")]


def test_grid_rejects_unknown_axis_and_empty():
    with pytest.raises(ConfigError):
        sweep_grid(FAST, trials=[1, 2])
    with pytest.raises(ConfigError):
        sweep_grid(FAST, r=[])
    with pytest.raises(ConfigError):
        run_sweep([])


def test_deviation_axis_overrides_k():
    grid = sweep_grid(replace(FAST, k=4, deviation=None), deviation=[0, 1])
    assert all(c.k is None for c in grid)


def test_partial_failures_recorded():
    base = replace(FAST, trials=1)
    grid = sweep_grid(base, dataset=["iris", "no-such-thing"], deviation=[0, 3])
    cells = run_sweep(grid, workers=1)
    assert len(cells) == 4
    ok = [c for c in cells if c.ok]
    skipped = [c for c in cells if c.skipped]
    failed = [c for c in cells if not c.ok and not c.skipped]
    assert [c.config.dataset for c in ok] == ["iris"]
    assert len(skipped) == 1 and skipped[0].config.deviation == 3
    assert len(failed) == 2
    # output rows = successful cells x trials
    assert len(emit(cells, "csv").splitlines()) == 1 + len(ok)


def test_parallel_matches_serial_in_grid_order(monkeypatch):
    grid = sweep_grid(replace(FAST, trials=1), deviation=[-1, 0, 1], r=[0.01, 0.05])
    serial = run_sweep(grid, workers=1)
    monkeypatch.setenv("RELCLUST_THREADS", "3")
    assert harness.worker_count() == 3
    parallel = run_sweep(grid)
    assert [c.config for c in parallel] == grid
    assert [c.result for c in parallel] == [c.result for c in serial]


def test_thread_env_validation(monkeypatch):
    monkeypatch.setenv("RELCLUST_THREADS", "many")
    with pytest.raises(ConfigError):
        harness.worker_count()
    monkeypatch.setenv("RELCLUST_THREADS", "0")
    assert harness.worker_count() == 1


def test_deviation_sweep_flat_on_iris():
    grid = sweep_grid(RunConfig(dataset="iris", algorithm="rdp_means", r=0.03, p=1.0, trials=5, seed=0),
                      deviation=range(-3, 4))
    cells = run_sweep(grid)
    assert [c.config.deviation for c in cells if c.skipped] == [3]
    F = [c.result.mean["F"] for c in cells if c.ok]
    assert len(F) == 6
    assert max(F) - min(F) <= 0.15, f"F by deviation -3..2: {np.round(F, 3).tolist()}"


# -- emit -------------------------------------------------------------------

@pytest.fixture(scope="module")
def one():
    return run_experiment(replace(FAST, trials=1))


def test_csv_header_and_one_row(one):
    lines = emit([one], "csv").splitlines()
    assert lines[0] == "dataset,algorithm,r,p,deviation,trial,F,ARI,NMI,K_found,seed"
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 2
    assert lines[1].startswith("iris,rdp_means,0.05,1,0,0,")


def test_json_round_trip(one):
    text = emit([one], "json")
    recs = [json.loads(line) for line in text.splitlines()]
    assert recs == harness.records([one])
    assert list(recs[0])[:len(CSV_HEADER)] == list(CSV_HEADER)
    assert recs[0]["config"]["dataset"] == "iris" and recs[0]["config"]["trials"] == 1


def test_six_significant_digits():
    cfg = replace(FAST, r=0.0123456789)
    t = harness.TrialResult(0, 0, 0.123456789, 1 / 3, 2 / 3, 3, 1, 1.0)
    res = harness.RunResult(cfg, (t,))
    rec = harness.records([res])[0]
    assert rec["F"] == 0.123457 and rec["ARI"] == 0.333333 and rec["r"] == 0.0123457
    row = emit([res], "csv").splitlines()[1].split(",")
    assert row[CSV_HEADER.index("F")] == "0.123457"


def test_emit_to_stream_and_file(one, tmp_path):
    buf = io.StringIO()
    text = emit([one], "csv", buf)
    assert buf.getvalue() == text
    p = tmp_path / "o.csv"
    emit([one], "csv", p)
    assert p.read_text() == text


def test_emit_errors(one, tmp_path):
    with pytest.raises(OSError):
        emit([one], "csv", tmp_path / "missing-dir" / "o.csv")
    with pytest.raises(ValueError):
        emit([], "csv")
    with pytest.raises(ValueError):
        emit([one], "xml")
