"""CSV ingestion, label encoding, stratified splitting and min-max scaling."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Raised when a dataset cannot be loaded, parsed or split."""


# name -> (display name used in result tables, class type)
DATASETS = {
    "breast_cancer_diagnostic": ("Breast Cancer (Diagnostic)", "binary"),
    "cancer": ("Cancer", "binary"),
    "haberman": ("Haberman's Survival", "binary"),
    "liver_disorder": ("Liver Disorder", "binary"),
    "pima": ("Pima Indians Diabetes", "binary"),
    "new_thyroid": ("New-Thyroid", "multi-class"),
    "diabetes130": ("Diabetes 130", "multi-class"),
}

DEFAULT_DATASETS = [name for name in DATASETS if name != "diabetes130"]


def display_name(name: str) -> str:
    return DATASETS.get(name, (name, None))[0]


def data_dir() -> Path:
    """Dataset directory; ``DDCL_DATA_DIR`` overrides the repository ``data/``."""
    env = os.environ.get("DDCL_DATA_DIR")
    if env:
        return Path(env)
    return Path(__file__).resolve().parents[2] / "data"


def dataset_path(name: str) -> Path:
    return data_dir() / f"{name}.csv"


@dataclass
class RawTable:
    header: list[str]
    rows: list[list[str]]
    label_index: int = -1

    @property
    def label_name(self) -> str:
        return self.header[self.label_index]


@dataclass
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: list[str]
    class_names: list[str]
    name: str = ""

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=int)
        return Dataset(self.features[idx], self.labels[idx], self.feature_names,
                       self.class_names, self.name)


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float = 0.7
    val_frac: float = 0.0
    test_frac: float = 0.3
    stratified: bool = True
    seed: int = 0

    def __post_init__(self):
        fracs = (self.train_frac, self.val_frac, self.test_frac)
        if any(f < 0 or f > 1 for f in fracs):
            raise DataError(f"split fractions must lie in [0, 1], got {fracs}")
        if abs(sum(fracs) - 1.0) > 1e-9:
            raise DataError(f"split fractions must sum to 1, got {sum(fracs)!r}")


@dataclass
class DataSplit:
    train_idx: np.ndarray
    val_idx: np.ndarray
    test_idx: np.ndarray


@dataclass
class ScalerParams:
    minimum: np.ndarray
    maximum: np.ndarray
    span: np.ndarray = field(init=False)

    def __post_init__(self):
        span = self.maximum - self.minimum
        self.span = np.where(span > 0, span, 1.0)


def _resolve_label(header: list[str], label_column) -> int:
    if label_column is None:
        return len(header) - 1
    if isinstance(label_column, int) or (isinstance(label_column, str) and label_column.lstrip("-").isdigit()):
        idx = int(label_column)
        if not -len(header) <= idx < len(header):
            raise DataError(f"label column index {idx} out of range for {len(header)} columns")
        return idx % len(header)
    if label_column not in header:
        raise DataError(f"unknown label column {label_column!r}; columns are {header}")
    return header.index(label_column)


def load_csv(path, label_column=None) -> RawTable:
    """Read a comma-delimited file with a header line.

    ``label_column`` is a column name or integer index; the last column is used
    when it is omitted.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"dataset file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if len(set(header)) != len(header):
            raise DataError(f"{path}: duplicate column names in header")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataError(
                    f"{path}: line {lineno} has {len(row)} cells, expected {len(header)}")
            rows.append([c.strip() for c in row])
    return RawTable(header, rows, _resolve_label(header, label_column))


def encode(raw: RawTable, label_column=None, name: str = "") -> Dataset:
    """Turn text cells into a float matrix and first-appearance class ids."""
    label_idx = raw.label_index if label_column is None else _resolve_label(raw.header, label_column)
    label_idx %= len(raw.header)
    if not raw.rows:
        raise DataError("table has no data rows")
    feat_cols = [j for j in range(len(raw.header)) if j != label_idx]
    if not feat_cols:
        raise DataError("table has no feature columns")

    class_names: list[str] = []
    lookup: dict[str, int] = {}
    labels = np.empty(len(raw.rows), dtype=int)
    features = np.empty((len(raw.rows), len(feat_cols)), dtype=float)
    for i, row in enumerate(raw.rows):
        lab = row[label_idx]
        if lab == "":
            raise DataError(f"row {i + 1}: missing label")
        if lab not in lookup:
            lookup[lab] = len(class_names)
            class_names.append(lab)
        labels[i] = lookup[lab]
        for k, j in enumerate(feat_cols):
            cell = row[j]
            try:
                value = float(cell)
            except ValueError:
                raise DataError(
                    f"row {i + 1}, column {raw.header[j]!r}: cannot parse {cell!r} as a number"
                ) from None
            if not math.isfinite(value):
                raise DataError(f"row {i + 1}, column {raw.header[j]!r}: non-finite value {cell!r}")
            features[i, k] = value
    return Dataset(features, labels, [raw.header[j] for j in feat_cols], class_names, name)


def load_dataset(name_or_path, label_column=None) -> Dataset:
    """Load a registered dataset by name, or any CSV by path."""
    path = Path(name_or_path)
    if not path.suffix:
        path = dataset_path(str(name_or_path))
    raw = load_csv(path, label_column)
    return encode(raw, name=path.stem)


def _allocate(counts: np.ndarray, frac: float) -> np.ndarray:
    """Per-class quotas summing to round(total * frac), largest remainder first."""
    total = int(math.ceil(counts.sum() * frac - 1e-9))
    exact = counts * frac
    quota = np.floor(exact + 1e-9).astype(int)
    remainder = exact - quota
    short = total - quota.sum()
    # stable argsort keeps the lower class id first among equal remainders
    for c in np.argsort(-remainder, kind="stable"):
        if short <= 0:
            break
        if quota[c] < counts[c]:
            quota[c] += 1
            short -= 1
    return quota


def split(ds: Dataset, spec: SplitSpec) -> DataSplit:
    """Stratified train/val/test split; index lists are returned sorted."""
    rng = np.random.default_rng(spec.seed)
    if spec.stratified:
        classes = np.arange(ds.n_classes)
        members = [np.flatnonzero(ds.labels == c) for c in classes]
        counts = np.array([len(m) for m in members])
    else:
        members = [np.arange(ds.n)]
        counts = np.array([ds.n])
    test_q = _allocate(counts, spec.test_frac)
    val_q = _allocate(counts, spec.val_frac)
    val_q = np.minimum(val_q, counts - test_q)
    train_q = counts - test_q - val_q
    if train_q.sum() == 0:
        raise DataError(f"split {spec} leaves the training split empty")

    train, val, test = [], [], []
    for idx, nt, nv in zip(members, test_q, val_q):
        perm = rng.permutation(idx)
        test.append(perm[:nt])
        val.append(perm[nt:nt + nv])
        train.append(perm[nt + nv:])
    return DataSplit(
        np.sort(np.concatenate(train)).astype(int),
        np.sort(np.concatenate(val)).astype(int),
        np.sort(np.concatenate(test)).astype(int),
    )


def fit_scaler(ds: Dataset, train_idx) -> ScalerParams:
    train_idx = np.asarray(train_idx, dtype=int)
    if train_idx.size == 0:
        raise DataError("cannot fit a scaler on an empty training split")
    x = ds.features[train_idx]
    return ScalerParams(x.min(axis=0), x.max(axis=0))


def apply_scaler(ds: Dataset, params: ScalerParams) -> Dataset:
    # values outside the training range extend linearly; nothing is clipped
    scaled = (ds.features - params.minimum) / params.span
    scaled[:, params.maximum == params.minimum] = 0.0
    return Dataset(scaled, ds.labels, ds.feature_names, ds.class_names, ds.name)
