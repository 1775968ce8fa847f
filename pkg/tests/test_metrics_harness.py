import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddcl.curriculum import CurriculumConfig, identity_ordering
from ddcl.data import load_dataset, split
from ddcl.harness import (ExperimentError, ExperimentPlan, LearnerOptions, aggregate_table,
                          best_run, derive_seed, execute_run, export_loss_curves,
                          read_confusion_csv, read_loss_csv, read_pr_csv, read_results_csv,
                          split_for, write_confusion_csv, write_details, write_loss_csv,
                          write_pr_csv, write_results_csv, run_experiment)
from ddcl.learners.mlp import TrainLog
from ddcl.metrics import accuracy, aggregate, confusion_matrix, precision_recall_curve

FAST = LearnerOptions(epochs=5, hidden=(4,), n_estimators=5)


# --- metrics ---------------------------------------------------------------------

def test_accuracy_examples():
    assert accuracy([1, 0, 2], [1, 0, 2]) == 1.0
    assert accuracy([0, 1], [1, 1]) == 0.5
    with pytest.raises(ValueError):
        accuracy([0], [0, 1])


def test_accuracy_hand_tally():
    rng = np.random.default_rng(0)
    p, t = rng.integers(0, 3, 50), rng.integers(0, 3, 50)
    tally = 0
    for a, b in zip(p, t):
        tally += int(a == b)
    assert accuracy(p, t) == tally / 50


def test_pr_perfect_scores():
    curve = precision_recall_curve([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0])
    assert (1.0, 1.0) in curve.points()


def test_pr_constant_scores():
    curve = precision_recall_curve([0.5] * 5, [1, 0, 0, 1, 0])
    assert curve.points() == [(1.0, 0.4)]


def test_pr_requires_positive():
    with pytest.raises(ValueError, match="no positive"):
        precision_recall_curve([0.1, 0.2], [0, 0])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.booleans()), min_size=1, max_size=30))
def test_pr_threshold_enumeration(pairs):
    scores = [s / 6 for s, _ in pairs]
    labels = [int(l) for _, l in pairs]
    if not any(labels):
        return
    expected = []
    for t in sorted(set(scores), reverse=True):
        tp = sum(1 for s, l in zip(scores, labels) if s >= t and l)
        fp = sum(1 for s, l in zip(scores, labels) if s >= t and not l)
        expected.append((tp / sum(labels), tp / (tp + fp)))
    curve = precision_recall_curve(scores, labels)
    assert np.allclose(curve.points(), expected, atol=1e-15)
    assert np.all(np.diff(curve.recall) >= 0)


def test_confusion_examples():
    assert confusion_matrix([0, 1, 2], [0, 1, 2], 3).tolist() == np.eye(3, dtype=int).tolist()
    cm = confusion_matrix([1, 0], [0, 0], 2)
    assert cm[0, 1] == 1 and cm[0, 0] == 1
    with pytest.raises(ValueError):
        confusion_matrix([3], [0], 3)


def test_confusion_hand_tally():
    rng = np.random.default_rng(1)
    p, t = rng.integers(0, 4, 40), rng.integers(0, 4, 40)
    grid = [[0] * 4 for _ in range(4)]
    for a, b in zip(p, t):
        grid[b][a] += 1
    cm = confusion_matrix(p, t, 4)
    assert cm.tolist() == grid and cm.sum() == 40


def test_aggregate_examples():
    st_ = aggregate([0.5, 1.0])
    assert (st_.worst, st_.best, st_.avg, st_.sigma) == (50.0, 100.0, 75.0, 25.0)
    one = aggregate([0.8])
    assert one.worst == one.best == one.avg == 80.0 and one.sigma == 0.0
    with pytest.raises(ValueError):
        aggregate([])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=40))
def test_aggregate_bounds(accs):
    a = aggregate(accs)
    assert a.worst <= a.avg <= a.best and a.sigma >= 0


def test_format_row():
    assert aggregate([0.65833]).format_row() == ("65.833", "65.833", "65.833 ±0.000")


# --- harness ---------------------------------------------------------------------

def test_split_for_families():
    assert (split_for("nn", 1).val_frac, split_for("nn", 1).test_frac) == (0.2, 0.1)
    assert (split_for("svm", 1).val_frac, split_for("rf", 1).test_frac) == (0.0, 0.3)


def test_derive_seed_stable():
    assert derive_seed(0, 3) == derive_seed(0, 3) != derive_seed(0, 4)


def test_plan_validation():
    with pytest.raises(ExperimentError):
        ExperimentPlan("haberman", "knn", "none")
    with pytest.raises(ExperimentError):
        ExperimentPlan("haberman", "svm", "easy")
    with pytest.raises(ExperimentError):
        ExperimentPlan("haberman", "svm", "none", n_runs=0)


def test_missing_dataset():
    with pytest.raises(ExperimentError):
        run_experiment(ExperimentPlan("no_such_dataset", "svm", "none", n_runs=1))


def test_single_run_deterministic():
    plan = ExperimentPlan("haberman", "nn", "density", n_runs=1, learner=FAST)
    a, = run_experiment(plan)
    b, = run_experiment(plan)
    assert a.accuracy == b.accuracy and np.array_equal(a.scores, b.scores)
    assert a.train_log.loss == b.train_log.loss


def test_no_curriculum_keeps_split_order():
    ds = load_dataset("haberman")
    seed = derive_seed(0, 0)
    parts = split(ds, split_for("svm", seed))
    y = ds.labels[parts.train_idx]
    x_ord, y_ord = identity_ordering(y).materialize(ds.features[parts.train_idx], y)
    assert np.array_equal(x_ord, ds.features[parts.train_idx]) and np.array_equal(y_ord, y)


@pytest.mark.parametrize("clf", ["nn", "svm", "rf"])
def test_scenarios_share_splits_and_keep_test_pure(clf):
    ds = load_dataset("haberman")
    runs = {s: execute_run(ExperimentPlan("haberman", clf, s, learner=FAST), ds, 2)
            for s in ("none", "density", "point")}
    base = runs["none"].test_idx
    for r in runs.values():
        assert np.array_equal(r.test_idx, base)
        assert len(r.labels) == len(base) and r.test_idx.max() < ds.n
        assert r.accuracy == pytest.approx((r.predictions == r.labels).mean())
    assert runs["none"].n_synthetic == 0


def test_parallel_matches_serial():
    plan = ExperimentPlan("haberman", "rf", "point", n_runs=3, learner=FAST)
    serial = [r.accuracy for r in run_experiment(plan)]
    parallel = [r.accuracy for r in run_experiment(plan, jobs=2)]
    assert serial == parallel


def test_failure_carries_run_index():
    plan = ExperimentPlan("haberman", "nn", "none", n_runs=1,
                          learner=LearnerOptions(epochs=2, hidden=(4,), learning_rate=float("inf")))
    with pytest.raises(ExperimentError, match="run 0"), np.errstate(all="ignore"):
        run_experiment(plan)


def test_best_run_tie_goes_to_earliest():
    plan = ExperimentPlan("haberman", "svm", "none", n_runs=1)
    r, = run_experiment(plan)
    other = type(r)(**{**r.__dict__, "run": 5})
    assert best_run([other, r]).run == 0


def test_export_loss_curves_rows():
    from ddcl.harness import RunResult
    mk = lambda run: RunResult(run, 0, 1.0, None, None, None, None,  # noqa: E731
                               train_log=TrainLog([0.9, 0.5, 0.3]))
    rows = export_loss_curves({"none": [mk(0), mk(1)]}, "toy")
    assert len(rows) == 6
    for run in (0, 1):
        epochs = [e for _, _, r, e, _ in rows if r == run]
        assert epochs == [1, 2, 3]
    assert len(export_loss_curves({"none": [mk(0)]}, "toy", max_epochs=2)) == 2


def test_loss_values_finite_over_sweep():
    results = {s: run_experiment(ExperimentPlan("liver_disorder", "nn", s, n_runs=2, learner=FAST))
               for s in ("none", "point")}
    rows = export_loss_curves(results, "liver_disorder")
    assert all(np.isfinite(l) and l >= 0 for *_, l in rows)


def test_file_round_trips(tmp_path):
    plan = ExperimentPlan("haberman", "svm", "none", n_runs=2)
    results = run_experiment(plan)
    write_results_csv(tmp_path / "r.csv", [("haberman", "svm", "none", r) for r in results])
    rows = read_results_csv(tmp_path / "r.csv")
    assert [r["accuracy"] for r in rows] == [r.accuracy for r in results]
    table = aggregate_table(rows)
    assert table["haberman"]["svm"]["none"]["worst"] <= table["haberman"]["svm"]["none"]["best"]

    loss = [("toy", "none", 0, 1, 0.5), ("toy", "none", 0, 2, 0.25)]
    write_loss_csv(tmp_path / "l.csv", loss)
    assert read_loss_csv(tmp_path / "l.csv") == loss

    curve = precision_recall_curve([0.9, 0.1, 0.4], [1, 0, 1])
    write_pr_csv(tmp_path / "p.csv", curve)
    assert read_pr_csv(tmp_path / "p.csv") == curve.points()

    write_confusion_csv(tmp_path / "c.csv", np.array([[3, 1], [0, 2]]), ["a", "b"])
    names, counts = read_confusion_csv(tmp_path / "c.csv")
    assert names == ["a", "b"] and counts.tolist() == [[3, 1], [0, 2]]

    target = write_details(tmp_path, "haberman", "svm", "none", results, ["1", "2"])
    assert (target / "confusion.csv").is_file() and (target / "pr_curve.csv").is_file()


def test_curriculum_config_reaches_runs():
    ds = load_dataset("haberman")
    cfg = CurriculumConfig(quantiles=3, smote_enabled=False)
    r = execute_run(ExperimentPlan("haberman", "svm", "density", curriculum=cfg), ds, 0)
    assert r.n_synthetic == 0
