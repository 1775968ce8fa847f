"""Plain SMOTE: interpolate between a sample and one of its nearest neighbours."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SyntheticSample:
    coords: np.ndarray
    parent_a: int
    parent_b: int
    lam: float
    class_id: int = -1


def k_nearest(pool, query_index: int, k: int) -> np.ndarray:
    """Indices of the ``k`` pool rows closest to ``pool[query_index]``.

    The query row itself is excluded; equal distances resolve to the lower
    index.
    """
    pool = np.asarray(pool, dtype=float)
    if pool.ndim == 1:
        pool = pool[:, None]
    if k < 1 or k > len(pool) - 1:
        raise ValueError(f"k={k} must be between 1 and pool size - 1 ({len(pool) - 1})")
    d2 = ((pool - pool[query_index]) ** 2).sum(axis=1)
    d2[query_index] = np.inf
    return np.lexsort((np.arange(len(pool)), d2))[:k]


def interpolate(pool, a: int, b: int, lam: float, class_id: int = -1, index=None) -> SyntheticSample:
    """The point ``lam`` of the way from ``pool[a]`` to ``pool[b]``."""
    pool = np.asarray(pool, dtype=float)
    if pool.ndim == 1:
        pool = pool[:, None]
    coords = pool[a] + lam * (pool[b] - pool[a])
    ia, ib = (a, b) if index is None else (index[a], index[b])
    return SyntheticSample(coords, int(ia), int(ib), float(lam), class_id)


def smote(pool, n_synthetic: int, k: int | None = None, rng=None, class_id: int = -1,
          index=None) -> list[SyntheticSample]:
    """Generate ``n_synthetic`` samples from ``pool``.

    Each sample picks a base row uniformly, one of its ``k`` nearest
    neighbours uniformly, and a gap ``lam ~ U[0, 1]``. ``index`` maps pool rows
    to the identifiers recorded as parents (defaults to pool positions).
    """
    pool = np.asarray(pool, dtype=float)
    if pool.ndim == 1:
        pool = pool[:, None]
    if len(pool) < 2:
        raise ValueError("SMOTE needs at least two samples in the pool")
    if k is None:
        k = min(5, len(pool) - 1)
    if k < 1:
        raise ValueError("k must be at least 1")
    k = min(k, len(pool) - 1)
    rng = np.random.default_rng(rng)
    index = np.arange(len(pool)) if index is None else np.asarray(index)

    neighbours = {}
    out = []
    for _ in range(n_synthetic):
        a = int(rng.integers(len(pool)))
        if a not in neighbours:
            neighbours[a] = k_nearest(pool, a, k)
        b = int(rng.choice(neighbours[a]))
        out.append(interpolate(pool, a, b, float(rng.random()), class_id, index))
    return out
