"""Sigmoid multilayer perceptron trained by plain gradient descent.

Samples are consumed in exactly the order given: minibatches are consecutive
slices of that order and nothing is shuffled, so a curriculum ordering carries
through to the parameter updates.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

_EPS = 1e-12


class TrainingDivergedError(RuntimeError):
    def __init__(self, epoch: int, loss: float):
        super().__init__(f"training diverged at epoch {epoch}: loss={loss}")
        self.epoch = epoch
        self.loss = loss


@dataclass(frozen=True)
class MlpSpec:
    n_inputs: int
    n_classes: int
    hidden: tuple[int, ...] = (16,)
    learning_rate: float = 0.1
    epochs: int = 200
    batch_size: int | None = 32  # None means full batch
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning rate must be positive")
        if self.n_inputs < 1 or self.n_classes < 2 or any(h < 1 for h in self.hidden):
            raise ValueError(f"invalid layer sizes {self.layer_sizes}")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch size must be >= 1")

    @property
    def n_outputs(self) -> int:
        # binary problems use a single sigmoid unit
        return 1 if self.n_classes == 2 else self.n_classes

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.n_inputs, *self.hidden, self.n_outputs)


@dataclass
class MlpModel:
    spec: MlpSpec
    weights: list[np.ndarray]
    biases: list[np.ndarray]


@dataclass
class TrainLog:
    loss: list[float] = field(default_factory=list)
    seconds: list[float] = field(default_factory=list)


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def init_model(spec: MlpSpec) -> MlpModel:
    """Uniform weights in +-1/sqrt(fan_in), zero biases."""
    rng = np.random.default_rng(spec.seed)
    sizes = spec.layer_sizes
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpModel(spec, weights, biases)


def zero_model(spec: MlpSpec) -> MlpModel:
    sizes = spec.layer_sizes
    return MlpModel(spec, [np.zeros((a, b)) for a, b in zip(sizes[:-1], sizes[1:])],
                    [np.zeros(b) for b in sizes[1:]])


def _forward(model: MlpModel, x):
    acts = [x]
    a = x
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = a @ w + b
        if i < last:
            a = _sigmoid(z)
        elif model.spec.n_outputs == 1:
            a = _sigmoid(z)
        else:
            a = _softmax(z)
        acts.append(a)
    return acts


def _targets(model: MlpModel, y):
    y = np.asarray(y, dtype=int)
    if model.spec.n_outputs == 1:
        return y[:, None].astype(float)
    t = np.zeros((len(y), model.spec.n_outputs))
    t[np.arange(len(y)), y] = 1.0
    return t


def cross_entropy(model: MlpModel, x, y) -> float:
    """Mean cross-entropy in nats."""
    out = _forward(model, np.asarray(x, dtype=float))[-1]
    t = _targets(model, y)
    if model.spec.n_outputs == 1:
        per = -(t * np.log(out + _EPS) + (1 - t) * np.log(1 - out + _EPS)).sum(axis=1)
    else:
        per = -(t * np.log(out + _EPS)).sum(axis=1)
    return float(per.mean())


def mlp_gradients(model: MlpModel, x, y):
    """Gradients of the mean cross-entropy; returns ``(loss, dW list, db list)``."""
    x = np.asarray(x, dtype=float)
    if len(x) == 0:
        raise ValueError("empty batch")
    acts = _forward(model, x)
    out = acts[-1]
    t = _targets(model, y)
    n = len(x)
    if model.spec.n_outputs == 1:
        loss = -(t * np.log(out + _EPS) + (1 - t) * np.log(1 - out + _EPS)).sum(axis=1).mean()
    else:
        loss = -(t * np.log(out + _EPS)).sum(axis=1).mean()
    # sigmoid+BCE and softmax+CE share the same output delta
    delta = (out - t) / n
    dw = [None] * len(model.weights)
    db = [None] * len(model.weights)
    for i in range(len(model.weights) - 1, -1, -1):
        dw[i] = acts[i].T @ delta
        db[i] = delta.sum(axis=0)
        if i > 0:
            a = acts[i]
            delta = (delta @ model.weights[i].T) * a * (1 - a)
    return float(loss), dw, db


def train_mlp(x, y, spec: MlpSpec, order=None) -> tuple[MlpModel, TrainLog]:
    """Train on ``x[order], y[order]``; ``order=None`` keeps the given order.

    Logged per-epoch loss is the sample-weighted mean of the minibatch losses
    seen during that epoch.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=int)
    if order is not None:
        x, y = x[order], y[order]
    model = init_model(spec)
    log = TrainLog()
    n = len(x)
    bs = n if spec.batch_size is None else min(spec.batch_size, n)
    lr = spec.learning_rate
    for epoch in range(1, spec.epochs + 1):
        start = time.perf_counter()
        total = 0.0
        for lo in range(0, n, bs):
            xb, yb = x[lo:lo + bs], y[lo:lo + bs]
            loss, dw, db = mlp_gradients(model, xb, yb)
            total += loss * len(xb)
            for i in range(len(dw)):
                model.weights[i] -= lr * dw[i]
                model.biases[i] -= lr * db[i]
        mean_loss = total / n
        if not np.isfinite(mean_loss):
            raise TrainingDivergedError(epoch, mean_loss)
        log.loss.append(mean_loss)
        log.seconds.append(time.perf_counter() - start)
    return model, log


def predict_proba(model: MlpModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != model.spec.n_inputs:
        raise ValueError(f"expected {model.spec.n_inputs} features, got shape {x.shape}")
    out = _forward(model, x)[-1]
    if model.spec.n_outputs == 1:
        return np.hstack([1 - out, out])
    return out


def predict_mlp(model: MlpModel, x):
    scores = predict_proba(model, x)
    return scores.argmax(axis=1), scores


DEFAULT_SEARCH_SPACE = ((4,), (8,), (16,), (32,), (16, 8), (32, 16))


def random_search(space, budget, rng):
    space = list(space)
    picks = rng.permutation(len(space))[: max(1, min(budget, len(space)))]
    return [space[i] for i in sorted(picks)]


def tune_hidden_layers(x_train, y_train, x_val, y_val, base: MlpSpec, search_space=DEFAULT_SEARCH_SPACE,
                       budget: int = 4, seed: int = 0, order=None, strategy=random_search) -> MlpSpec:
    """Pick the hidden-layer layout with the best validation accuracy.

    ``strategy(space, budget, rng)`` returns the candidates to evaluate; the
    default is a seeded random subset of ``search_space``. Ties keep the
    earlier candidate.
    """
    space = [tuple(c) for c in search_space]
    if not space:
        raise ValueError("hidden-layer search space is empty")
    if len(x_val) == 0:
        raise ValueError("validation split is empty")
    candidates = strategy(space, budget, np.random.default_rng(seed))
    best, best_acc = None, -1.0
    for hidden in candidates:
        spec = replace(base, hidden=hidden)
        model, _ = train_mlp(x_train, y_train, spec, order=order)
        acc = float((predict_mlp(model, x_val)[0] == np.asarray(y_val)).mean())
        if acc > best_acc:
            best, best_acc = spec, acc
    return best
