"""Accuracy, precision-recall curves, confusion matrices and run aggregates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def accuracy(predictions, labels) -> float:
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if predictions.shape != labels.shape:
        raise ValueError(f"length mismatch: {predictions.shape} vs {labels.shape}")
    if labels.size == 0:
        raise ValueError("no samples to score")
    return int((predictions == labels).sum()) / labels.size


@dataclass
class PrCurve:
    recall: np.ndarray
    precision: np.ndarray
    thresholds: np.ndarray
    positive_class: int = 1

    def points(self):
        return list(zip(self.recall.tolist(), self.precision.tolist()))


def precision_recall_curve(scores, labels, positive_class: int = 1) -> PrCurve:
    """Sweep every distinct score from high to low, predicting positive at ``score >= t``."""
    scores = np.asarray(scores, dtype=float)
    positive = np.asarray(labels) == positive_class
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores must be finite")
    n_pos = int(positive.sum())
    if n_pos == 0:
        raise ValueError("no positive examples")
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    tp = np.cumsum(positive[order])
    fp = np.cumsum(~positive[order])
    # last index of each run of equal scores
    ends = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    tp, fp = tp[ends], fp[ends]
    return PrCurve(tp / n_pos, tp / (tp + fp), s[ends], positive_class)


def confusion_matrix(predictions, labels, n_classes: int) -> np.ndarray:
    """``counts[true, predicted]``."""
    predictions = np.asarray(predictions, dtype=int)
    labels = np.asarray(labels, dtype=int)
    if predictions.shape != labels.shape:
        raise ValueError("length mismatch")
    for arr in (predictions, labels):
        if arr.size and (arr.min() < 0 or arr.max() >= n_classes):
            raise ValueError(f"class id out of range for {n_classes} classes")
    counts = np.zeros((n_classes, n_classes), dtype=int)
    np.add.at(counts, (labels, predictions), 1)
    return counts


@dataclass
class AggregateStats:
    worst: float
    best: float
    avg: float
    sigma: float
    n_runs: int = 0

    def as_dict(self):
        return {"worst": self.worst, "best": self.best, "avg": self.avg, "sigma": self.sigma}

    def format_row(self) -> tuple[str, str, str]:
        return f"{self.worst:.3f}", f"{self.best:.3f}", f"{self.avg:.3f} ±{self.sigma:.3f}"


def aggregate(accuracies) -> AggregateStats:
    """Min/max/mean and population standard deviation, in percent."""
    acc = np.asarray([getattr(a, "accuracy", a) for a in accuracies], dtype=float) * 100.0
    if acc.size == 0:
        raise ValueError("cannot aggregate zero runs")
    lo, hi = float(acc.min()), float(acc.max())
    # summation rounding must not push the mean outside [worst, best]
    avg = min(max(float(acc.mean()), lo), hi)
    return AggregateStats(lo, hi, avg,
                          float(acc.std(ddof=0)), int(acc.size))
