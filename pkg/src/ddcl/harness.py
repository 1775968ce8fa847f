"""Repeated-run experiments: split, order, train, evaluate, aggregate, export.

One :class:`ExperimentPlan` covers a dataset, a classifier and a scenario.
Run ``i`` draws its seed from ``(master_seed, i)`` only, so the three
scenarios of a dataset/classifier pair see the same splits and
initialisations and differ only in training order.
"""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import data as data_mod
from .curriculum import CurriculumConfig, build_curriculum, identity_ordering
from .learners.forest import ForestSpec, predict_forest, train_forest
from .learners.mlp import MlpSpec, TrainLog, predict_mlp, train_mlp, tune_hidden_layers
from .learners.svm import SvmSpec, predict_svm, train_svm
from .metrics import aggregate, confusion_matrix, precision_recall_curve

log = logging.getLogger(__name__)

SCENARIOS = ("none", "density", "point")
SCENARIO_LABELS = {"none": "No Curriculum", "density": "DDCL-Density", "point": "DDCL-Point"}
CLASSIFIERS = ("nn", "svm", "rf")
CLASSIFIER_LABELS = {"nn": "Neural Network", "svm": "SVM", "rf": "Random Forest"}

RESULTS_HEADER = ["dataset", "classifier", "scenario", "run", "seed", "accuracy"]
LOSS_HEADER = ["dataset", "scenario", "run", "epoch", "loss"]


class ExperimentError(RuntimeError):
    def __init__(self, message, run=None):
        super().__init__(message if run is None else f"run {run}: {message}")
        self.run = run


def split_for(classifier: str, seed: int) -> data_mod.SplitSpec:
    """NN: 70/20/10 train/val/test; SVM and RF: 70/30 train/test."""
    if classifier == "nn":
        return data_mod.SplitSpec(0.7, 0.2, 0.1, seed=seed)
    return data_mod.SplitSpec(0.7, 0.0, 0.3, seed=seed)


def derive_seed(master_seed: int, run: int) -> int:
    return int(np.random.SeedSequence([master_seed, run]).generate_state(1)[0])


@dataclass
class LearnerOptions:
    epochs: int = 200
    learning_rate: float = 0.1
    batch_size: int | None = 32
    full_batch: bool = False
    hidden: tuple | None = None  # fixed layout; None runs the hidden-layer search
    search_budget: int = 4
    svm_C: float = 1.0
    n_estimators: int = 100
    max_split_features: int = 2


@dataclass
class ExperimentPlan:
    dataset: str
    classifier: str
    scenario: str
    n_runs: int = 30
    master_seed: int = 0
    curriculum: CurriculumConfig = field(default_factory=CurriculumConfig)
    learner: LearnerOptions = field(default_factory=LearnerOptions)

    def __post_init__(self):
        if self.classifier not in CLASSIFIERS:
            raise ExperimentError(f"unknown classifier {self.classifier!r}")
        if self.scenario not in SCENARIOS:
            raise ExperimentError(f"unknown scenario {self.scenario!r}")
        if self.n_runs < 1:
            raise ExperimentError("n_runs must be >= 1")


@dataclass
class RunResult:
    run: int
    seed: int
    accuracy: float
    predictions: np.ndarray
    labels: np.ndarray
    scores: np.ndarray
    test_idx: np.ndarray
    n_synthetic: int = 0
    train_log: TrainLog | None = None
    hidden: tuple | None = None


def scenario_ordering(x_train, y_train, scenario: str, cfg: CurriculumConfig, seed: int):
    if scenario == "none":
        return identity_ordering(y_train)
    return build_curriculum(x_train, y_train, replace(cfg, scoring=scenario, seed=seed))


def execute_run(plan: ExperimentPlan, ds: data_mod.Dataset, run: int) -> RunResult:
    seed = derive_seed(plan.master_seed, run)
    parts = data_mod.split(ds, split_for(plan.classifier, seed))
    scaled = data_mod.apply_scaler(ds, data_mod.fit_scaler(ds, parts.train_idx))
    x_tr, y_tr = scaled.features[parts.train_idx], scaled.labels[parts.train_idx]
    x_te, y_te = scaled.features[parts.test_idx], scaled.labels[parts.test_idx]

    ordering = scenario_ordering(x_tr, y_tr, plan.scenario, plan.curriculum, seed)
    x_ord, y_ord = ordering.materialize(x_tr, y_tr)
    opts = plan.learner
    train_log = None
    hidden = None
    if plan.classifier == "nn":
        base = MlpSpec(ds.n_features, ds.n_classes, hidden=opts.hidden or (16,),
                       learning_rate=opts.learning_rate, epochs=opts.epochs,
                       batch_size=None if opts.full_batch else opts.batch_size, seed=seed)
        if opts.hidden is None:
            x_va, y_va = scaled.features[parts.val_idx], scaled.labels[parts.val_idx]
            base = tune_hidden_layers(x_ord, y_ord, x_va, y_va, base,
                                      budget=opts.search_budget, seed=seed)
        hidden = base.hidden
        model, train_log = train_mlp(x_ord, y_ord, base)
        pred, scores = predict_mlp(model, x_te)
    elif plan.classifier == "svm":
        model = train_svm(x_ord, y_ord, SvmSpec(C=opts.svm_C))
        pred, scores = predict_svm(model, x_te)
    else:
        spec = ForestSpec(opts.n_estimators, min(opts.max_split_features, ds.n_features), seed=seed)
        model = train_forest(x_ord, y_ord, spec, n_classes=ds.n_classes)
        pred, scores = predict_forest(model, x_te)

    acc = int((pred == y_te).sum()) / len(y_te)
    return RunResult(run, seed, acc, pred, y_te, scores, parts.test_idx,
                     ordering.n_synthetic, train_log, hidden)


def _run_one(args):
    plan, ds, run = args
    try:
        return execute_run(plan, ds, run)
    except Exception as exc:  # re-raised with the run index attached
        raise ExperimentError(f"{type(exc).__name__}: {exc}", run) from exc


def run_experiment(plan: ExperimentPlan, ds: data_mod.Dataset | None = None,
                   jobs: int = 1) -> list[RunResult]:
    """Execute every run of ``plan``; results come back in run order."""
    if ds is None:
        try:
            ds = data_mod.load_dataset(plan.dataset)
        except data_mod.DataError as exc:
            raise ExperimentError(str(exc)) from exc
    tasks = [(plan, ds, i) for i in range(plan.n_runs)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_one, tasks))
    return [_run_one(t) for t in tasks]


def best_run(results: list[RunResult]) -> RunResult:
    """Highest accuracy; the earliest run wins ties."""
    return max(results, key=lambda r: (r.accuracy, -r.run))


def export_loss_curves(results_by_scenario: dict, dataset: str = "", max_epochs: int | None = None):
    """Flatten NN training logs into ``(dataset, scenario, run, epoch, loss)`` rows."""
    rows = []
    for scenario, results in results_by_scenario.items():
        for r in results:
            if r.train_log is None:
                continue
            losses = r.train_log.loss if max_epochs is None else r.train_log.loss[:max_epochs]
            for epoch, loss in enumerate(losses, start=1):
                rows.append((dataset, scenario, r.run, epoch, loss))
    return rows


# --- file formats ---------------------------------------------------------------

def write_results_csv(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULTS_HEADER)
        for dataset, classifier, scenario, r in rows:
            w.writerow([dataset, classifier, scenario, r.run, r.seed, repr(r.accuracy)])


def read_results_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RESULTS_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [{**row, "run": int(row["run"]), "seed": int(row["seed"]),
                 "accuracy": float(row["accuracy"])} for row in reader]


def aggregate_table(result_rows) -> dict:
    """dataset -> classifier -> scenario -> stats dict, from ``read_results_csv`` rows."""
    grouped: dict = {}
    for row in result_rows:
        key = (row["dataset"], row["classifier"], row["scenario"])
        grouped.setdefault(key, []).append(row["accuracy"])
    out: dict = {}
    for (dataset, classifier, scenario), accs in grouped.items():
        out.setdefault(dataset, {}).setdefault(classifier, {})[scenario] = aggregate(accs).as_dict()
    return out


def write_aggregate_json(path, table):
    Path(path).write_text(json.dumps(table, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_loss_csv(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LOSS_HEADER)
        for dataset, scenario, run, epoch, loss in rows:
            w.writerow([dataset, scenario, run, epoch, repr(float(loss))])


def read_loss_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != LOSS_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [(r["dataset"], r["scenario"], int(r["run"]), int(r["epoch"]), float(r["loss"]))
                for r in reader]


def write_pr_csv(path, curve):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["recall", "precision"])
        for rec, prec in curve.points():
            w.writerow([repr(rec), repr(prec)])


def read_pr_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return [(float(r["recall"]), float(r["precision"])) for r in reader]


def write_confusion_csv(path, counts, class_names):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["true\\pred", *class_names])
        for name, row in zip(class_names, counts):
            w.writerow([name, *map(int, row)])


def read_confusion_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    names = rows[0][1:]
    counts = np.array([[int(v) for v in r[1:]] for r in rows[1:]], dtype=int)
    return names, counts


def write_details(out_dir, dataset: str, classifier: str, scenario: str,
                  results: list[RunResult], class_names):
    """PR curve (binary) and confusion matrix of the best run."""
    best = best_run(results)
    target = Path(out_dir) / "details" / dataset / classifier / scenario
    target.mkdir(parents=True, exist_ok=True)
    write_confusion_csv(target / "confusion.csv",
                        confusion_matrix(best.predictions, best.labels, len(class_names)), class_names)
    if len(class_names) == 2 and (best.labels == 1).any():
        curve = precision_recall_curve(best.scores[:, 1], best.labels, positive_class=1)
        write_pr_csv(target / "pr_curve.csv", curve)
    return target
