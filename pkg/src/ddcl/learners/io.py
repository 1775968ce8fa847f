"""Versioned JSON dumps of trained models, resolved spec included."""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .forest import ForestModel, ForestSpec, Tree
from .mlp import MlpModel, MlpSpec
from .svm import BinaryMachine, SvmModel, SvmSpec

FORMAT = "ddcl-model"
VERSION = 1


def _arr(a):
    return np.asarray(a).tolist()


def model_to_dict(model) -> dict:
    if isinstance(model, MlpModel):
        body = {"kind": "mlp", "spec": asdict(model.spec),
                "weights": [_arr(w) for w in model.weights],
                "biases": [_arr(b) for b in model.biases]}
    elif isinstance(model, SvmModel):
        body = {"kind": "svm", "spec": asdict(model.spec), "gamma": model.gamma,
                "n_classes": model.n_classes, "n_features": model.n_features,
                "machines": [{"support_vectors": _arr(m.support_vectors),
                              "dual_coef": _arr(m.dual_coef), "bias": m.bias,
                              "alpha": _arr(m.alpha), "iterations": m.iterations}
                             for m in model.machines]}
    elif isinstance(model, ForestModel):
        body = {"kind": "forest", "spec": asdict(model.spec), "n_classes": model.n_classes,
                "n_features": model.n_features,
                "trees": [{k: _arr(getattr(t, k)) for k in ("feature", "threshold", "left", "right", "value")}
                          for t in model.trees]}
    else:
        raise TypeError(f"cannot serialise {type(model).__name__}")
    return {"format": FORMAT, "version": VERSION, **body}


def model_from_dict(doc: dict):
    if doc.get("format") != FORMAT or doc.get("version") != VERSION:
        raise ValueError(f"unsupported model document {doc.get('format')!r} v{doc.get('version')}")
    kind = doc["kind"]
    if kind == "mlp":
        spec = MlpSpec(**{**doc["spec"], "hidden": tuple(doc["spec"]["hidden"])})
        sizes = spec.layer_sizes
        weights = [np.array(w, dtype=float).reshape(a, b)
                   for w, a, b in zip(doc["weights"], sizes[:-1], sizes[1:])]
        return MlpModel(spec, weights, [np.array(b, dtype=float) for b in doc["biases"]])
    if kind == "svm":
        machines = [BinaryMachine(np.array(m["support_vectors"], dtype=float).reshape(-1, doc["n_features"]),
                                  np.array(m["dual_coef"], dtype=float), m["bias"],
                                  np.array(m["alpha"], dtype=float), m["iterations"])
                    for m in doc["machines"]]
        return SvmModel(SvmSpec(**doc["spec"]), doc["gamma"], doc["n_classes"], doc["n_features"], machines)
    if kind == "forest":
        trees = [Tree(np.array(t["feature"], dtype=int), np.array(t["threshold"], dtype=float),
                      np.array(t["left"], dtype=int), np.array(t["right"], dtype=int),
                      np.array(t["value"], dtype=float).reshape(len(t["feature"]), doc["n_classes"]))
                 for t in doc["trees"]]
        return ForestModel(ForestSpec(**doc["spec"]), doc["n_classes"], doc["n_features"], trees)
    raise ValueError(f"unknown model kind {kind!r}")


def save_model(model, path):
    Path(path).write_text(json.dumps(model_to_dict(model)), encoding="utf-8")


def load_model(path):
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
