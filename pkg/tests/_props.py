"""Ordering invariants shared by the unit tests and the acceptance gate."""

import numpy as np

from ddcl.curriculum import CurriculumConfig, build_curriculum


def random_dataset(rng):
    n = int(rng.integers(2, 60))
    d = int(rng.integers(1, 6))
    k = int(rng.integers(1, 4))
    x = rng.normal(size=(n, d)) * rng.uniform(0.1, 10, size=d)
    y = rng.integers(0, k, size=n)
    return x, y


def check_ordering(x, y, scoring, seed=0):
    """Assert permutation preservation and the scorer's monotonicity."""
    o = build_curriculum(x, y, CurriculumConfig(scoring=scoring, seed=seed))
    originals = np.sort(o.source[~o.synthetic])
    assert np.array_equal(originals, np.arange(len(y))), "originals not a permutation"
    assert np.array_equal(np.sort(o.row), np.arange(len(o))), "rows not a permutation"
    assert np.array_equal(o.class_id[~o.synthetic], y[o.source[~o.synthetic]])
    if scoring == "density":
        counts = np.array([o.partitions[c].counts[q] for c, q in zip(o.class_id, o.quantile)])
        assert np.all(np.diff(counts) <= 0), "bin counts increase along a density ordering"
    else:
        assert np.all(np.diff(o.normalized_distance) >= 0), "distances decrease along a point ordering"
    return o
