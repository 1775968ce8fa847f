#!/usr/bin/env python3
"""Rebuild data/*.csv from offline copies of the UCI tables.

The UCI repository itself is not always reachable, so the raw tables are
taken from two PyPI distributions that vendor them:

* ``keel_ds`` (KEEL mirror of UCI): Liver Disorder (bupa), Cancer
  (wisconsin), Haberman's Survival, Pima Indians Diabetes, New-Thyroid.
* scikit-learn: Breast Cancer Wisconsin (Diagnostic) at full precision.

Usage::

    python scripts/build_datasets.py [--wheel keel_ds-0.2.5-py3-none-any.whl] [--out data]

Without ``--wheel`` the wheel is fetched with ``pip download``.

Note: the KEEL archive only ships New-Thyroid as a one-vs-rest binary
relabelling ("new-thyroid1"); the three-class original has to be fetched
by hand from UCI (``new-thyroid.data``) and converted with ``--new-thyroid``.
"""

import argparse
import csv
import subprocess
import sys
import tempfile
import zipfile
from pathlib import Path

KEEL_FILES = {
    "liver_disorder": (
        "keel_ds/data/balanced/raw/bupa.dat",
        ["mcv", "alkphos", "sgpt", "sgot", "gammagt", "drinks"],
    ),
    "cancer": (
        "keel_ds/data/balanced/raw/wisconsin.dat",
        [
            "clump_thickness",
            "cell_size_uniformity",
            "cell_shape_uniformity",
            "marginal_adhesion",
            "epithelial_cell_size",
            "bare_nuclei",
            "bland_chromatin",
            "normal_nucleoli",
            "mitoses",
        ],
    ),
    "haberman": (
        "keel_ds/data/imbalanced/raw/haberman.dat",
        ["age", "operation_year", "positive_nodes"],
    ),
    "pima": (
        "keel_ds/data/balanced/raw/pima.dat",
        ["pregnancies", "glucose", "blood_pressure", "skin_thickness",
         "insulin", "bmi", "pedigree", "age"],
    ),
    "new_thyroid": (
        "keel_ds/data/imbalanced/raw/new-thyroid1.dat",
        ["t3_resin", "thyroxin", "triiodothyronine", "tsh", "tsh_diff"],
    ),
}

# Cancer is published with duplicated records; the deduplicated table is the
# closest match to the instance count used in the experiments.
DEDUPLICATE = {"cancer"}


def _read_dat(text):
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        rows.append([cell.strip() for cell in line.split(",")])
    return rows


def _write(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    print(f"wrote {path} ({len(rows)} rows)")


def _fetch_wheel(dest):
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "keel_ds==0.2.5", "--no-deps", "-d", dest],
        check=True,
    )
    return next(Path(dest).glob("keel_ds-*.whl"))


def build_keel(wheel, out):
    with zipfile.ZipFile(wheel) as zf:
        for name, (member, features) in KEEL_FILES.items():
            rows = _read_dat(zf.read(member).decode("utf-8"))
            if name in DEDUPLICATE:
                seen = set()
                unique = []
                for row in rows:
                    key = tuple(row)
                    if key not in seen:
                        seen.add(key)
                        unique.append(row)
                rows = unique
            _write(out / f"{name}.csv", features + ["class"], rows)


def build_wdbc(out):
    from sklearn.datasets import load_breast_cancer

    bunch = load_breast_cancer()
    names = [n.replace(" ", "_") for n in bunch.feature_names]
    # sklearn encodes malignant as 0; keep the UCI letters instead
    labels = ["M" if t == 0 else "B" for t in bunch.target]
    rows = [[repr(float(v)) for v in x] + [lab] for x, lab in zip(bunch.data, labels)]
    _write(out / "breast_cancer_diagnostic.csv", names + ["class"], rows)


def build_new_thyroid_from_uci(raw, out):
    rows = []
    for line in Path(raw).read_text().splitlines():
        cells = [c.strip() for c in line.split(",") if c.strip()]
        if cells:
            rows.append(cells[1:] + [cells[0]])
    header = ["t3_resin", "thyroxin", "triiodothyronine", "tsh", "tsh_diff", "class"]
    _write(out / "new_thyroid.csv", header, rows)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--wheel", type=Path, help="local keel_ds wheel")
    parser.add_argument("--new-thyroid", type=Path, help="UCI new-thyroid.data (3 classes)")
    parser.add_argument("--out", type=Path, default=Path("data"))
    args = parser.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        wheel = args.wheel or _fetch_wheel(tmp)
        build_keel(wheel, args.out)
    build_wdbc(args.out)
    if args.new_thyroid:
        build_new_thyroid_from_uci(args.new_thyroid, args.out)


if __name__ == "__main__":
    main()
