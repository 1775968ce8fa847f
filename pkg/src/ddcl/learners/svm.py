"""Soft-margin RBF SVM solved with SMO (second-order working set selection)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TAU = 1e-12


@dataclass(frozen=True)
class SvmSpec:
    C: float = 1.0
    gamma: str | float = "scale"
    tolerance: float = 1e-3
    max_passes: int = 100_000

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError("C must be positive")
        if self.gamma != "scale" and not float(self.gamma) > 0:
            raise ValueError("gamma must be positive")


@dataclass
class BinaryMachine:
    support_vectors: np.ndarray
    dual_coef: np.ndarray  # alpha_i * y_i for each support vector
    bias: float
    alpha: np.ndarray = field(repr=False)  # full alpha over the training rows
    iterations: int = 0


@dataclass
class SvmModel:
    spec: SvmSpec
    gamma: float
    n_classes: int
    n_features: int
    machines: list[BinaryMachine]


def resolve_gamma(spec: SvmSpec, x) -> float:
    """``scale`` gives ``1 / (d * mean per-feature variance)``."""
    if spec.gamma != "scale":
        return float(spec.gamma)
    x = np.asarray(x, dtype=float)
    var = x.var(axis=0).mean()
    return 1.0 / (x.shape[1] * var) if var > 0 else 1.0


def rbf_kernel(a, b, gamma: float):
    """``exp(-gamma * ||a - b||^2)``; matrices give the full Gram block."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim == 1 and b.ndim == 1:
        if a.shape != b.shape:
            raise ValueError("dimension mismatch")
        return float(np.exp(-gamma * ((a - b) ** 2).sum()))
    a2 = np.atleast_2d(a)
    b2 = np.atleast_2d(b)
    d2 = (a2 * a2).sum(1)[:, None] + (b2 * b2).sum(1)[None, :] - 2.0 * a2 @ b2.T
    return np.exp(-gamma * np.maximum(d2, 0.0))


def smo(K, y, C: float, tol: float = 1e-3, max_iter: int = 100_000):
    """Solve ``min 0.5 a'Qa - e'a`` s.t. ``y'a = 0, 0 <= a <= C``.

    ``y`` holds +-1 labels. Returns ``(alpha, rho, iterations)``; the decision
    function is ``sum_i alpha_i y_i K(x_i, x) - rho``.
    """
    y = np.asarray(y, dtype=float)
    n = len(y)
    Q = K * np.outer(y, y)
    diag = np.diag(K).copy()
    alpha = np.zeros(n)
    G = -np.ones(n)
    it = 0
    while it < max_iter:
        yG = -y * G
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y < 0) & (alpha < C)) | ((y > 0) & (alpha > 0))
        if not up.any() or not low.any():
            break
        cand = np.where(up, yG, -np.inf)
        i = int(np.argmax(cand))
        g_max = cand[i]
        g_min = np.where(low, yG, np.inf).min()
        if g_max - g_min < tol:
            break
        b = g_max - yG
        a = diag[i] + diag - 2.0 * y[i] * y * Q[i]
        a = np.where(a > 0, a, TAU)
        score = np.where(low & (b > 0), -(b * b) / a, np.inf)
        j = int(np.argmin(score))
        if not np.isfinite(score[j]):
            break
        it += 1

        old_i, old_j = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = max(Q[i, i] + Q[j, j] + 2 * Q[i, j], TAU)
            delta = (-G[i] - G[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0
                    alpha[i] = diff
            elif alpha[i] < 0:
                alpha[i] = 0
                alpha[j] = -diff
            if diff > 0:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = C - diff
            elif alpha[j] > C:
                alpha[j] = C
                alpha[i] = C + diff
        else:
            quad = max(Q[i, i] + Q[j, j] - 2 * Q[i, j], TAU)
            delta = (G[i] - G[j]) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = total - C
            elif alpha[j] < 0:
                alpha[j] = 0
                alpha[i] = total
            if total > C:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = total - C
            elif alpha[i] < 0:
                alpha[i] = 0
                alpha[j] = total
        G += Q[i] * (alpha[i] - old_i) + Q[j] * (alpha[j] - old_j)

    yG = y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = yG[free].mean()
    else:
        ub, lb = np.inf, -np.inf
        at_upper = alpha >= C
        at_lower = alpha <= 0
        # bounds on rho from the KKT conditions of bounded variables
        for cond, sign in ((at_upper & (y < 0), 1), (at_lower & (y > 0), 1),
                           (at_upper & (y > 0), -1), (at_lower & (y < 0), -1)):
            if cond.any():
                if sign > 0:
                    ub = min(ub, yG[cond].min())
                else:
                    lb = max(lb, yG[cond].max())
        rho = (ub + lb) / 2 if np.isfinite(ub) and np.isfinite(lb) else (ub if np.isfinite(ub) else lb)
    return alpha, float(rho), it


def _fit_binary(K, x, y_pm, spec: SvmSpec) -> BinaryMachine:
    alpha, rho, it = smo(K, y_pm, spec.C, spec.tolerance, spec.max_passes)
    sv = alpha > 0
    return BinaryMachine(x[sv], (alpha * y_pm)[sv], -rho, alpha, it)


def train_svm(x, y, spec: SvmSpec | None = None, order=None) -> SvmModel:
    """Binary problems use one machine (class 1 positive); more classes use one-vs-rest."""
    spec = spec or SvmSpec()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=int)
    if order is not None:
        x, y = x[order], y[order]
    classes = np.unique(y)
    if len(classes) < 2:
        raise ValueError("SVM training needs at least two classes")
    n_classes = int(y.max()) + 1
    gamma = resolve_gamma(spec, x)
    K = rbf_kernel(x, x, gamma)
    if n_classes == 2:
        machines = [_fit_binary(K, x, np.where(y == 1, 1.0, -1.0), spec)]
    else:
        machines = [_fit_binary(K, x, np.where(y == c, 1.0, -1.0), spec) for c in range(n_classes)]
    return SvmModel(spec, gamma, n_classes, x.shape[1], machines)


def decision_function(model: SvmModel, x) -> np.ndarray:
    """Shape ``(n, machines)`` decision values."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} features, got shape {x.shape}")
    cols = []
    for m in model.machines:
        if len(m.support_vectors):
            cols.append(rbf_kernel(x, m.support_vectors, model.gamma) @ m.dual_coef + m.bias)
        else:
            cols.append(np.full(len(x), m.bias))
    return np.column_stack(cols)


def predict_svm(model: SvmModel, x):
    f = decision_function(model, x)
    if model.n_classes == 2:
        scores = np.hstack([-f, f])
    else:
        scores = f
    return scores.argmax(axis=1), scores
