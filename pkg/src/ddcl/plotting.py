"""Matplotlib figures written straight to SVG files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

SCENARIO_STYLE = {
    "none": dict(color="#4d4d4d", linestyle="--", label="No Curriculum"),
    "density": dict(color="#1b6ca8", linestyle="-", label="DDCL-Density"),
    "point": dict(color="#d1495b", linestyle="-.", label="DDCL-Point"),
}

RC = {
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "ddcl",  # stable element ids across runs
    "svg.fonttype": "none",
}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_loss_curves(curves: dict, path, title: str = ""):
    """``curves`` maps scenario -> (epochs, mean loss[, spread])."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.2, 3.0))
        for scenario, values in curves.items():
            epochs, loss = values[0], values[1]
            style = SCENARIO_STYLE.get(scenario, {"label": scenario})
            ax.plot(epochs, loss, linewidth=1.2, **style)
            if len(values) > 2 and values[2] is not None:
                ax.fill_between(epochs, loss - values[2], loss + values[2],
                                color=style.get("color"), alpha=0.12, linewidth=0)
        ax.set_xlabel("Epoch")
        ax.set_ylabel("Cross-entropy loss")
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        return _save(fig, path)


def plot_pr_curves(curves: dict, path, title: str = ""):
    """``curves`` maps scenario -> list of ``(recall, precision)``."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(3.6, 3.2))
        for scenario, points in curves.items():
            rec, prec = zip(*points)
            ax.step([0.0, *rec], [prec[0], *prec], where="post", linewidth=1.2,
                    **SCENARIO_STYLE.get(scenario, {"label": scenario}))
        ax.set_xlim(0, 1.02)
        ax.set_ylim(0, 1.05)
        ax.set_xlabel("Recall")
        ax.set_ylabel("Precision")
        if title:
            ax.set_title(title)
        ax.legend(frameon=False, loc="lower left")
        return _save(fig, path)


def plot_confusion(counts, class_names, path, title: str = ""):
    counts = np.asarray(counts)
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(3.4, 3.0))
        ax.imshow(counts, cmap="Blues")
        ticks = np.arange(len(class_names))
        ax.set_xticks(ticks, class_names, rotation=30, ha="right")
        ax.set_yticks(ticks, class_names)
        ax.set_xlabel("Predicted")
        ax.set_ylabel("True")
        threshold = counts.max() / 2 if counts.size else 0
        for i in range(counts.shape[0]):
            for j in range(counts.shape[1]):
                ax.text(j, i, str(counts[i, j]), ha="center", va="center",
                        color="white" if counts[i, j] > threshold else "black")
        if title:
            ax.set_title(title)
        return _save(fig, path)


def plot_density(densities: dict, class_names, path, n_bins: int | None = None, title: str = ""):
    """Per-class KDE of normalised centroid distances, with quantile edges."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.2, 3.0))
        for cid, est in densities.items():
            ax.plot(est.grid, est.values, linewidth=1.2, label=str(class_names[cid]))
        if n_bins:
            for e in np.arange(1, n_bins) / n_bins:
                ax.axvline(e, color="#bbbbbb", linewidth=0.6, zorder=0)
        ax.set_xlabel("Normalised distance to class centroid")
        ax.set_ylabel("Density")
        if title:
            ax.set_title(title)
        ax.legend(frameon=False, title="class")
        return _save(fig, path)
