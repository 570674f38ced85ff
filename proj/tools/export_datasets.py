#!/usr/bin/env python3
"""Export the benchmark tables used by the test suite as plain CSV files.

Wine and Breast Cancer (Wisconsin) ship with scikit-learn. The Heart Disease
table (918 rows, 11 features) is not redistributable from a Python package;
pass the Kaggle "heart.csv" file with --heart and its categorical columns are
ordinal-encoded (sorted category order) so every feature is numeric.
"""

import argparse
import csv
import pathlib


def write_table(path, names, rows, labels, label_name="target"):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(names) + [label_name])
        for row, lab in zip(rows, labels):
            w.writerow([repr(float(v)) for v in row] + [lab])


def export_sklearn(out):
    from sklearn.datasets import load_breast_cancer, load_wine

    wine = load_wine()
    # class labels 1..3 as in the original UCI file
    write_table(out / "wine.csv", wine.feature_names, wine.data,
                [int(t) + 1 for t in wine.target], "class")

    bc = load_breast_cancer()
    write_table(out / "breast_cancer.csv",
                [n.replace(" ", "_") for n in bc.feature_names], bc.data,
                ["M" if t == 0 else "B" for t in bc.target], "diagnosis")


def export_heart(src, out):
    with open(src, newline="") as fh:
        rows = list(csv.DictReader(fh))
    label = "HeartDisease"
    cols = [c for c in rows[0].keys() if c != label]
    categories = {}
    for c in cols:
        try:
            [float(r[c]) for r in rows]
        except ValueError:
            categories[c] = {v: i for i, v in enumerate(sorted({r[c] for r in rows}))}
    with open(out / "heart.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols + [label])
        for r in rows:
            w.writerow([categories[c][r[c]] if c in categories else r[c] for c in cols] + [r[label]])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "tests" / "data"))
    ap.add_argument("--heart", help="path to the 918-row Kaggle heart.csv")
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    export_sklearn(out)
    if args.heart:
        export_heart(args.heart, out)


if __name__ == "__main__":
    main()
