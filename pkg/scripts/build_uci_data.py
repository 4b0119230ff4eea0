"""Rebuild the bundled UCI CSVs under src/relclust/data/.

The sandbox this was written in has no route to the UCI archive, so each
dataset is assembled from an offline copy of the same records:

* iris, wine   -- the CSVs scikit-learn ships
* ecoli        -- KEEL one-vs-rest splits (keel-ds), whose rows keep the UCI
                  class-sorted order, so the 8 class labels are recovered by
                  position plus the imU split matched on features
* glass        -- MASS::fgl (rdatasets); RI is stored there as
                  1000 * (RI - 1.518) and is mapped back
* balance      -- the UCI balance-scale file is the full 5^4 enumeration,
                  regenerated exactly

Needs ``pip install keel-ds rdatasets`` (not runtime dependencies).
"""
from __future__ import annotations

import csv
import itertools
import os
from importlib import resources

import numpy as np

OUT = os.path.join(os.path.dirname(__file__), "..", "src", "relclust", "data")


def _write(name, header, rows):
    path = os.path.join(OUT, f"{name}.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    print(f"{name}: {len(rows)} rows -> {os.path.normpath(path)}")


def _sklearn_csv(fname, names):
    import sklearn.datasets

    path = resources.files(sklearn.datasets) / "data" / fname
    with path.open() as fh:
        lines = list(csv.reader(fh))
    classes = lines[0][2:]
    rows = [r[:-1] + [classes[int(r[-1])]] for r in lines[1:]]
    return rows


def build_iris():
    header = ["sepal_length", "sepal_width", "petal_length", "petal_width", "class"]
    _write("iris", header, _sklearn_csv("iris.csv", header))


def build_wine():
    header = [f"f{i}" for i in range(13)] + ["class"]
    _write("wine", header, _sklearn_csv("wine_data.csv", header))


def _keel_rows(name):
    import keel_ds

    path = resources.files(keel_ds) / "data" / "imbalanced" / "raw" / f"{name}.dat"
    out = []
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        *feats, lab = [v.strip() for v in line.split(",")]
        out.append((tuple(round(float(v), 2) for v in feats), lab == "positive"))
    return out


def build_ecoli():
    base = _keel_rows("ecoli1")
    feats = [f for f, _ in base]
    n = len(feats)
    assert n == 336
    label = np.array(["cp"] * n, dtype=object)
    # UCI file order: cp, im, imL, imS, imU, om, omL, pp
    for split, cls in (("ecoli1", "im"), ("ecoli2", "pp"), ("ecoli4", "om")):
        rows = _keel_rows(split)
        assert [f for f, _ in rows] == feats
        label[[i for i, (_, pos) in enumerate(rows) if pos]] = cls
    imu = {f for f, pos in _keel_rows("ecoli3") if pos}
    imu_idx = [i for i, f in enumerate(feats) if f in imu]
    assert imu_idx == list(range(224, 259)), imu_idx[:5]
    label[imu_idx] = "imU"
    label[220:222] = "imL"
    label[222:224] = "imS"
    label[279:284] = "omL"
    counts = {c: int((label == c).sum()) for c in set(label)}
    assert counts == {"cp": 143, "im": 77, "imL": 2, "imS": 2, "imU": 35,
                      "om": 20, "omL": 5, "pp": 52}, counts
    header = ["mcg", "gvh", "lip", "chg", "aac", "alm1", "alm2", "class"]
    rows = [[f"{v:.2f}" for v in f] + [lab] for f, lab in zip(feats, label)]
    _write("ecoli", header, rows)


def build_glass():
    import rdatasets

    df = rdatasets.data("MASS", "fgl")
    cols = ["RI", "Na", "Mg", "Al", "Si", "K", "Ca", "Ba", "Fe"]
    rows = []
    for _, r in df.iterrows():
        ri = 1.518 + r["RI"] / 1000.0
        rows.append([f"{ri:.5f}"] + [f"{r[c]:g}" for c in cols[1:]] + [r["type"]])
    _write("glass", cols + ["class"], rows)


def build_balance():
    rows = []
    for lw, ld, rw, rd in itertools.product(range(1, 6), repeat=4):
        left, right = lw * ld, rw * rd
        cls = "L" if left > right else ("R" if left < right else "B")
        rows.append([lw, ld, rw, rd, cls])
    _write("balance", ["left_weight", "left_distance", "right_weight",
                       "right_distance", "class"], rows)


if __name__ == "__main__":
    os.makedirs(OUT, exist_ok=True)
    build_iris()
    build_wine()
    build_ecoli()
    build_glass()
    build_balance()
