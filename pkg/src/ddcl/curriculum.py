"""Curriculum construction from per-class centroid distances.

Training samples are grouped by class, each group is summarised by its
centroid, and every sample is described by its min-max normalised Euclidean
distance to that centroid. The normalised distances are cut into equal-width
quantile bins; sparse bins may be topped up with SMOTE samples. Two scorers
turn this into a training order:

``density``
    bins sorted by population, most populated first (all classes pooled).
``point``
    samples sorted by normalised distance, closest first (all classes pooled).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .smote import SyntheticSample, smote

SCORINGS = ("density", "point")


class CurriculumError(ValueError):
    pass


@dataclass
class CurriculumConfig:
    scoring: str = "density"
    quantiles: int = 6
    bandwidth: str | float = "silverman"
    smote_enabled: bool = True
    smote_min_size: int = 3
    n_centroids: int = 1
    tie_break: str = "class_then_quantile_index"
    seed: int = 0

    def __post_init__(self):
        if self.scoring not in SCORINGS:
            raise CurriculumError(f"scoring must be one of {SCORINGS}, got {self.scoring!r}")
        if self.quantiles < 2:
            raise CurriculumError("quantile count must be at least 2")
        if self.smote_enabled and self.smote_min_size < 2:
            raise CurriculumError("smote_min_size must be at least 2")
        if self.bandwidth != "silverman":
            try:
                h = float(self.bandwidth)
            except (TypeError, ValueError):
                raise CurriculumError(f"bad bandwidth rule {self.bandwidth!r}") from None
            if not h > 0:
                raise CurriculumError("fixed bandwidth must be positive")
        if self.n_centroids < 1:
            raise CurriculumError("n_centroids must be at least 1")
        if self.tie_break != "class_then_quantile_index":
            raise CurriculumError(f"unsupported tie-break policy {self.tie_break!r}")


@dataclass
class ClassGroup:
    class_id: int
    member_idx: np.ndarray
    features: np.ndarray


@dataclass
class Centroid:
    class_id: int
    coords: np.ndarray


@dataclass
class DistanceSet:
    class_id: int
    raw: np.ndarray
    normalized: np.ndarray


@dataclass
class DensityEstimate:
    class_id: int
    grid: np.ndarray
    values: np.ndarray
    bandwidth: float


@dataclass
class QuantilePartition:
    class_id: int
    edges: np.ndarray
    assignment: np.ndarray
    counts: np.ndarray

    @property
    def n_bins(self) -> int:
        return len(self.edges) - 1


@dataclass
class CurriculumOrdering:
    """Training order over original rows plus any synthetic rows.

    ``row`` indexes the stacked matrix ``[X_train; synthetic_features]``;
    ``source`` is the training position for original rows and -1 for
    synthetic ones.
    """

    row: np.ndarray
    source: np.ndarray
    class_id: np.ndarray
    quantile: np.ndarray
    normalized_distance: np.ndarray
    synthetic: np.ndarray
    parent_a: np.ndarray
    parent_b: np.ndarray
    lam: np.ndarray
    synthetic_features: np.ndarray
    densities: dict = field(default_factory=dict)
    partitions: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.row)

    @property
    def rank(self) -> np.ndarray:
        return np.arange(len(self.row))

    @property
    def n_synthetic(self) -> int:
        return int(self.synthetic.sum())

    def materialize(self, features, labels):
        """Return ``(X, y)`` in curriculum order, synthetic rows included."""
        features = np.asarray(features, dtype=float)
        stacked = features
        if len(self.synthetic_features):
            stacked = np.vstack([features, self.synthetic_features])
        all_y = np.empty(len(stacked), dtype=int)
        all_y[: len(features)] = labels
        all_y[self.row[self.synthetic]] = self.class_id[self.synthetic]
        return stacked[self.row], all_y[self.row]

    def records(self):
        """Rows for ``ordering.csv``."""
        for r in range(len(self.row)):
            synth = bool(self.synthetic[r])
            yield {
                "rank": r,
                "source": "" if synth else int(self.source[r]),
                "class_id": int(self.class_id[r]),
                "quantile": int(self.quantile[r]),
                "normalized_distance": float(self.normalized_distance[r]),
                "synthetic": int(synth),
                "parent_a": int(self.parent_a[r]) if synth else "",
                "parent_b": int(self.parent_b[r]) if synth else "",
                "lambda": float(self.lam[r]) if synth else "",
            }


def identity_ordering(labels) -> CurriculumOrdering:
    """The as-loaded order, with no curriculum processing at all."""
    labels = np.asarray(labels, dtype=int)
    n = len(labels)
    idx = np.arange(n)
    return CurriculumOrdering(
        row=idx, source=idx.copy(), class_id=labels.copy(), quantile=np.full(n, -1),
        normalized_distance=np.full(n, np.nan), synthetic=np.zeros(n, dtype=bool),
        parent_a=np.full(n, -1), parent_b=np.full(n, -1), lam=np.full(n, np.nan),
        synthetic_features=np.empty((0, 0)),
    )


def group_by_class(features, labels) -> list[ClassGroup]:
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels, dtype=int)
    groups = []
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        groups.append(ClassGroup(int(c), idx, features[idx]))
    return groups


def _kmeans(x, k, rng, n_iter=100):
    # k-means++ seeding followed by Lloyd iterations
    k = min(k, len(np.unique(x, axis=0)))
    centers = [x[rng.integers(len(x))]]
    for _ in range(1, k):
        d2 = np.min([((x - c) ** 2).sum(axis=1) for c in centers], axis=0)
        centers.append(x[rng.choice(len(x), p=d2 / d2.sum())])
    centers = np.array(centers)
    for _ in range(n_iter):
        assign = ((x[:, None, :] - centers[None]) ** 2).sum(axis=2).argmin(axis=1)
        new = np.array([x[assign == j].mean(axis=0) if np.any(assign == j) else centers[j]
                        for j in range(k)])
        if np.allclose(new, centers):
            break
        centers = new
    return centers


def compute_centroid(group: ClassGroup, k: int = 1, rng=None) -> Centroid:
    """Class centroid; ``k > 1`` returns the k-means centres as a ``(k, d)`` array."""
    if len(group.features) == 0:
        raise CurriculumError(f"class {group.class_id} has no members")
    if k == 1:
        coords = group.features.mean(axis=0)
    else:
        coords = _kmeans(group.features, k, np.random.default_rng(rng))
    return Centroid(group.class_id, coords)


def compute_distances(group: ClassGroup, centroid: Centroid) -> np.ndarray:
    coords = np.asarray(centroid.coords, dtype=float)
    if coords.shape[-1] != group.features.shape[1]:
        raise CurriculumError(
            f"centroid has {coords.shape[-1]} dims, members have {group.features.shape[1]}")
    if coords.ndim == 1:
        return np.sqrt(((group.features - coords) ** 2).sum(axis=1))
    d = np.sqrt(((group.features[:, None, :] - coords[None]) ** 2).sum(axis=2))
    return d.min(axis=1)


def normalize_distances(raw) -> np.ndarray:
    raw = np.asarray(raw, dtype=float)
    if raw.size == 0:
        raise CurriculumError("cannot normalise an empty distance set")
    lo, hi = raw.min(), raw.max()
    if hi <= lo:
        return np.zeros_like(raw)
    return (raw - lo) / (hi - lo)


def silverman_bandwidth(values) -> float:
    """Silverman's rule of thumb, ``0.9 min(sd, IQR/1.34) n^(-1/5)``.

    Quartiles use the Hazen plotting position; a zero result falls back to
    ``1e-3``.
    """
    values = np.asarray(values, dtype=float)
    n = values.size
    if n < 2:
        raise CurriculumError("bandwidth selection needs at least two values")
    sd = values.std(ddof=1)
    q25, q75 = np.percentile(values, [25, 75], method="hazen")
    spread = min(sd, (q75 - q25) / 1.34)
    h = 0.9 * spread * n ** (-0.2)
    return h if h > 0 else 1e-3


def kde_grid(h: float, n_points: int = 256) -> np.ndarray:
    return np.linspace(-4 * h, 1 + 4 * h, n_points)


def estimate_density(points, h: float, grid=None, class_id: int = -1) -> DensityEstimate:
    """Gaussian KDE of ``points`` evaluated on ``grid``."""
    if not h > 0:
        raise CurriculumError(f"bandwidth must be positive, got {h}")
    points = np.asarray(points, dtype=float)
    grid = kde_grid(h) if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise CurriculumError("evaluation grid is empty")
    u = (grid[:, None] - points[None, :]) / h
    values = np.exp(-0.5 * u * u).sum(axis=1) / (len(points) * h * math.sqrt(2 * math.pi))
    return DensityEstimate(class_id, grid, values, float(h))


def partition_quantiles(normalized, n_bins: int, class_id: int = -1) -> QuantilePartition:
    """Equal-width bins ``[i/K, (i+1)/K)`` over [0, 1]; the last bin is closed."""
    if n_bins < 2:
        raise CurriculumError("need at least two quantile bins")
    normalized = np.asarray(normalized, dtype=float)
    edges = np.arange(n_bins + 1) / n_bins
    assignment = np.clip(np.searchsorted(edges, normalized, side="right") - 1, 0, n_bins - 1)
    counts = np.bincount(assignment, minlength=n_bins)
    return QuantilePartition(class_id, edges, assignment, counts)


def oversample_sparse_quantiles(partition: QuantilePartition, features, cfg: CurriculumConfig,
                                seed=None):
    """Top up bins holding ``2 <= |q| < smote_min_size`` members with SMOTE.

    ``features`` are the class members' rows, aligned with
    ``partition.assignment``. Returns the updated partition and, per bin, the
    list of synthetic samples (parents are member positions within the class).
    Bins with fewer than two members are left alone.
    """
    features = np.asarray(features, dtype=float)
    counts = partition.counts.copy()
    created: dict[int, list[SyntheticSample]] = {}
    if not cfg.smote_enabled:
        return partition, created
    base = cfg.seed if seed is None else seed
    for b in range(partition.n_bins):
        size = int(partition.counts[b])
        if 2 <= size < cfg.smote_min_size:
            members = np.flatnonzero(partition.assignment == b)
            rng = np.random.default_rng([base, partition.class_id % 2**32, b])
            created[b] = smote(features[members], cfg.smote_min_size - size,
                               k=min(5, size - 1), rng=rng, class_id=partition.class_id,
                               index=members)
            counts[b] += len(created[b])
    return QuantilePartition(partition.class_id, partition.edges, partition.assignment, counts), created


@dataclass
class _Entry:
    row: int
    source: int
    class_id: int
    quantile: int
    dist: float
    synthetic: bool
    parent_a: int = -1
    parent_b: int = -1
    lam: float = float("nan")


def _assemble(entries, synth_features, densities, partitions) -> CurriculumOrdering:
    def col(name, dtype):
        return np.array([getattr(e, name) for e in entries], dtype=dtype)

    d = synth_features.shape[1] if len(synth_features) else 0
    return CurriculumOrdering(
        row=col("row", int), source=col("source", int), class_id=col("class_id", int),
        quantile=col("quantile", int), normalized_distance=col("dist", float),
        synthetic=col("synthetic", bool), parent_a=col("parent_a", int),
        parent_b=col("parent_b", int), lam=col("lam", float),
        synthetic_features=synth_features if len(synth_features) else np.empty((0, d)),
        densities=densities, partitions=partitions,
    )


def density_bin_order(counts: dict) -> list:
    """Bins as ``(class_id, quantile)`` keys, most populated first.

    Equal populations go to the lower class id, then the lower bin index.
    """
    return sorted(counts, key=lambda cb: (-counts[cb], cb[0], cb[1]))


def point_order(normalized, class_ids, synthetic=None) -> np.ndarray:
    """Positions sorted by normalised distance, then class id, then position."""
    normalized = np.asarray(normalized, dtype=float)
    synthetic = np.zeros(len(normalized), dtype=bool) if synthetic is None else np.asarray(synthetic)
    pos = np.arange(len(normalized))
    return np.lexsort((pos, synthetic, np.asarray(class_ids), normalized))


def score_density(entries, counts: dict) -> list:
    by_bin: dict = {cb: [] for cb in counts}
    for e in entries:
        by_bin[(e.class_id, e.quantile)].append(e)
    ordered = []
    for cb in density_bin_order(counts):
        ordered.extend(sorted(by_bin[cb], key=lambda e: (e.dist, e.synthetic, e.row)))
    return ordered


def score_point(entries) -> list:
    order = point_order([e.dist for e in entries], [e.class_id for e in entries],
                        [e.synthetic for e in entries])
    # rows are ascending within each class already, so position order equals row order
    return [entries[i] for i in order]


def build_curriculum(features, labels, cfg: CurriculumConfig | None = None) -> CurriculumOrdering:
    """Run the full pipeline on a (scaled) training split."""
    cfg = cfg or CurriculumConfig()
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if features.ndim != 2 or len(features) == 0:
        raise CurriculumError("training features must be a non-empty 2-D array")
    if len(labels) != len(features):
        raise CurriculumError("features and labels differ in length")

    n = len(features)
    entries: list[_Entry] = []
    synth_rows: list[np.ndarray] = []
    counts: dict = {}
    densities: dict = {}
    partitions: dict = {}

    for group in group_by_class(features, labels):
        c = group.class_id
        centroid = compute_centroid(group, cfg.n_centroids, rng=[cfg.seed, c])
        raw = compute_distances(group, centroid)
        norm = normalize_distances(raw)
        if len(norm) >= 2:
            h = silverman_bandwidth(norm) if cfg.bandwidth == "silverman" else float(cfg.bandwidth)
            densities[c] = estimate_density(norm, h, class_id=c)
        part = partition_quantiles(norm, cfg.quantiles, class_id=c)
        part, created = oversample_sparse_quantiles(part, group.features, cfg)
        partitions[c] = part

        for pos, row in enumerate(group.member_idx):
            entries.append(_Entry(int(row), int(row), c, int(part.assignment[pos]), float(norm[pos]), False))

        lo, hi = raw.min(), raw.max()
        for b, samples in created.items():
            for s in samples:
                sd = float(compute_distances(ClassGroup(c, np.array([0]), s.coords[None]), centroid)[0])
                nd = 0.0 if hi <= lo else min(max((sd - lo) / (hi - lo), 0.0), 1.0)
                row = n + len(synth_rows)
                synth_rows.append(s.coords)
                entries.append(_Entry(row, -1, c, b, nd, True,
                                      int(group.member_idx[s.parent_a]),
                                      int(group.member_idx[s.parent_b]), s.lam))
        for b in range(part.n_bins):
            if part.counts[b] > 0:
                counts[(c, b)] = int(part.counts[b])

    if cfg.scoring == "density":
        ordered = score_density(entries, counts)
    else:
        ordered = score_point(entries)
    synth = np.array(synth_rows) if synth_rows else np.empty((0, features.shape[1]))
    return _assemble(ordered, synth, densities, partitions)
