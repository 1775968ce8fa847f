import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddcl.smote import interpolate, k_nearest, smote


def test_k_nearest_1d():
    assert k_nearest(np.array([0.0, 1.0, 10.0]), 0, 1).tolist() == [1]


def test_k_nearest_duplicate_is_nearest():
    pool = np.array([[1.0, 1.0], [5.0, 5.0], [1.0, 1.0], [1.5, 1.0]])
    assert k_nearest(pool, 0, 1).tolist() == [2]


def test_k_nearest_rejects_large_k():
    with pytest.raises(ValueError):
        k_nearest(np.zeros((3, 2)), 0, 3)


def test_k_nearest_matches_full_sort():
    rng = np.random.default_rng(4)
    pool = rng.normal(size=(20, 4))
    for q in range(20):
        dists = [(sum((pool[j, c] - pool[q, c]) ** 2 for c in range(4)), j) for j in range(20) if j != q]
        expected = [j for _, j in sorted(dists)[:5]]
        assert k_nearest(pool, q, 5).tolist() == expected


def test_interpolate_midpoint_and_identity():
    pool = np.array([0.0, 1.0])
    assert interpolate(pool, 0, 1, 0.5).coords.tolist() == [0.5]
    s = interpolate(np.array([[2.0, 3.0], [4.0, -1.0]]), 0, 1, 0.0)
    assert s.coords.tolist() == [2.0, 3.0]


def test_smote_needs_two_samples():
    with pytest.raises(ValueError):
        smote(np.array([[1.0, 2.0]]), 1)


def _on_segment(p, a, b, lam):
    return np.max(np.abs(p - (a + lam * (b - a)))) <= 1e-12 and 0.0 <= lam <= 1.0


def test_smote_segment_membership():
    rng = np.random.default_rng(0)
    pool = rng.normal(size=(12, 2))
    out = smote(pool, 100, k=3, rng=1, class_id=4)
    assert len(out) == 100
    for s in out:
        assert _on_segment(s.coords, pool[s.parent_a], pool[s.parent_b], s.lam)
        assert s.parent_b in k_nearest(pool, s.parent_a, 3)
        assert s.class_id == 4


def test_smote_deterministic():
    pool = np.random.default_rng(2).normal(size=(6, 3))
    a = smote(pool, 10, rng=9)
    b = smote(pool, 10, rng=9)
    assert all(np.array_equal(x.coords, y.coords) and x.lam == y.lam for x, y in zip(a, b))


def test_smote_index_mapping():
    pool = np.array([[0.0], [1.0], [3.0]])
    out = smote(pool, 5, rng=0, index=np.array([10, 20, 30]))
    assert {s.parent_a for s in out} <= {10, 20, 30}


@settings(max_examples=50, deadline=None)
@given(n=st.integers(2, 15), d=st.integers(1, 4), seed=st.integers(0, 2**32 - 1))
def test_smote_convexity_property(n, d, seed):
    pool = np.random.default_rng(seed).uniform(-5, 5, size=(n, d))
    for s in smote(pool, 8, rng=seed):
        assert _on_segment(s.coords, pool[s.parent_a], pool[s.parent_b], s.lam)
