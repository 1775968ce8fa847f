"""Random forest of Gini-split decision trees with bootstrap sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ForestSpec:
    n_estimators: int = 100
    max_split_features: int = 2
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        if self.max_split_features < 1:
            raise ValueError("max_split_features must be >= 1")


@dataclass
class Tree:
    """Flat array tree; ``feature == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # (n_nodes, n_classes) class counts

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def apply(self, x) -> np.ndarray:
        node = np.zeros(len(x), dtype=int)
        active = self.feature[node] >= 0
        while active.any():
            idx = np.flatnonzero(active)
            nd = node[idx]
            go_left = x[idx, self.feature[nd]] <= self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] >= 0
        return node


@dataclass
class ForestModel:
    spec: ForestSpec
    n_classes: int
    n_features: int
    trees: list[Tree]


def _best_split(xs, ys, n_classes):
    """Lowest weighted Gini split on one feature; ``None`` if the feature is constant."""
    order = np.argsort(xs, kind="stable")
    v = xs[order]
    valid = v[1:] > v[:-1]
    if not valid.any():
        return None
    onehot = np.zeros((len(v), n_classes))
    onehot[np.arange(len(v)), ys[order]] = 1.0
    left = np.cumsum(onehot, axis=0)[:-1]
    right = left[-1] + onehot[-1] - left
    n_left = np.arange(1, len(v))
    n_right = len(v) - n_left
    # weighted impurity n_l*gini_l + n_r*gini_r, up to a constant
    score = -((left ** 2).sum(1) / n_left + (right ** 2).sum(1) / n_right)
    score[~valid] = np.inf
    k = int(np.argmin(score))
    return score[k], 0.5 * (v[k] + v[k + 1])


def build_tree(x, y, n_classes: int, max_features: int, rng) -> Tree:
    d = x.shape[1]
    max_features = min(max_features, d)
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(np.bincount(y[idx], minlength=n_classes))
        return len(feature) - 1

    root_idx = np.arange(len(y))
    stack = [(new_node(root_idx), root_idx)]
    while stack:
        node, idx = stack.pop()
        counts = value[node]
        if len(idx) < 2 or (counts > 0).sum() <= 1:
            continue
        best = None
        visited = 0
        for f in rng.permutation(d):
            if visited >= max_features and best is not None:
                break
            found = _best_split(x[idx, f], y[idx], n_classes)
            if found is None:
                continue
            visited += 1
            if best is None or found[0] < best[0]:
                best = (found[0], f, found[1])
        if best is None:
            continue
        _, f, thr = best
        mask = x[idx, f] <= thr
        li, ri = idx[mask], idx[~mask]
        feature[node] = int(f)
        threshold[node] = float(thr)
        left[node] = new_node(li)
        right[node] = new_node(ri)
        stack.append((right[node], ri))
        stack.append((left[node], li))
    return Tree(np.array(feature), np.array(threshold), np.array(left), np.array(right),
                np.array(value, dtype=float))


def train_forest(x, y, spec: ForestSpec | None = None, order=None, n_classes: int | None = None) -> ForestModel:
    """Fit ``spec.n_estimators`` trees.

    Bootstrap draws are positions into the (curriculum-ordered) training array,
    generated from ``(seed, tree index)``; the ordering therefore decides which
    samples each draw picks up.
    """
    spec = spec or ForestSpec()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=int)
    if order is not None:
        x, y = x[order], y[order]
    n_classes = n_classes or int(y.max()) + 1
    if spec.max_split_features > x.shape[1]:
        raise ValueError(f"max_split_features={spec.max_split_features} exceeds {x.shape[1]} features")
    trees = []
    for t in range(spec.n_estimators):
        rng = np.random.default_rng([spec.seed, t])
        if spec.bootstrap:
            draw = rng.integers(0, len(y), size=len(y))
            xb, yb = x[draw], y[draw]
        else:
            xb, yb = x, y
        trees.append(build_tree(xb, yb, n_classes, spec.max_split_features, rng))
    return ForestModel(spec, n_classes, x.shape[1], trees)


def predict_forest(model: ForestModel, x):
    """Majority vote; scores are per-class vote fractions."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} features, got shape {x.shape}")
    votes = np.zeros((len(x), model.n_classes))
    rows = np.arange(len(x))
    for tree in model.trees:
        leaf = tree.apply(x)
        votes[rows, tree.value[leaf].argmax(axis=1)] += 1
    scores = votes / len(model.trees)
    return scores.argmax(axis=1), scores
