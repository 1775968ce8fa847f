import csv
import json

import numpy as np
import pytest

from ddcl.cli import main
from ddcl.harness import read_loss_csv, read_results_csv
from ddcl.report import TABLE_HEADER


def _ordering(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_ingest_summary(capsys):
    assert main(["ingest", "--dataset", "haberman"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["rows"] == 306 and sum(summary["classes"].values()) == 306


def test_ingest_missing_file(tmp_path, capsys):
    assert main(["ingest", "--dataset", str(tmp_path / "gone.csv")]) == 2
    assert "not found" in capsys.readouterr().err


def test_curriculum_point(tmp_path):
    out = tmp_path / "cur"
    assert main(["curriculum", "--dataset", "haberman", "--scoring", "point", "--out", str(out)]) == 0
    rows = _ordering(out / "ordering.csv")
    originals = [r for r in rows if r["synthetic"] == "0"]
    assert len(originals) == 214
    dists = [float(r["normalized_distance"]) for r in rows]
    assert all(a <= b for a, b in zip(dists, dists[1:]))
    assert (out / "density.svg").is_file()
    with open(out / "density_class0.csv") as fh:
        assert fh.readline().strip() == "y,density"


def test_curriculum_density_counts_non_increasing(tmp_path):
    out = tmp_path / "cur"
    assert main(["curriculum", "--dataset", "liver_disorder", "--scoring", "density",
                 "--out", str(out)]) == 0
    rows = _ordering(out / "ordering.csv")
    keys = [(r["class_id"], r["quantile"]) for r in rows]
    counts = [keys.count(k) for k in keys]
    assert all(a >= b for a, b in zip(counts, counts[1:]))


def test_curriculum_exit_codes(tmp_path):
    assert main(["curriculum", "--dataset", str(tmp_path / "x.csv"), "--out", str(tmp_path)]) == 2
    assert main(["curriculum", "--dataset", "haberman", "--quantiles", "1",
                 "--out", str(tmp_path)]) == 3


def _run(out, *extra):
    return main(["run", "--dataset", "haberman", "--classifier", "svm", "--runs", "2",
                 "--out", str(out), *extra])


def test_run_rows_and_idempotence(tmp_path):
    assert _run(tmp_path / "a") == 0
    assert _run(tmp_path / "b") == 0
    rows = read_results_csv(tmp_path / "a" / "results.csv")
    assert len(rows) == 6
    assert {r["scenario"] for r in rows} == {"none", "density", "point"}
    for name in ("results.csv", "aggregate.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    agg = json.loads((tmp_path / "a" / "aggregate.json").read_text())
    for st in agg["haberman"]["svm"].values():
        assert st["worst"] <= st["avg"] <= st["best"]


def test_run_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"datasets": ["haberman"], "classifiers": ["rf"], "scenarios": ["none"],
                               "n_runs": 3, "learner": {"n_estimators": 4}}))
    out = tmp_path / "o"
    assert main(["run", "--config", str(cfg), "--runs", "1", "--out", str(out)]) == 0
    rows = read_results_csv(out / "results.csv")
    assert len(rows) == 1 and rows[0]["classifier"] == "rf"
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["learner"]["n_estimators"] == 4


def test_run_config_errors(tmp_path):
    assert _run(tmp_path, "--scoring", "random") == 3
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", "--config", str(bad)]) == 3
    bad.write_text(json.dumps({"colour": "red"}))
    assert main(["run", "--config", str(bad)]) == 3


def test_run_failure_keeps_partial_results(tmp_path):
    out = tmp_path / "o"
    code = main(["run", "--dataset", "haberman,missing_dataset", "--classifier", "svm",
                 "--scoring", "none", "--runs", "1", "--out", str(out)])
    assert code == 4
    assert len(read_results_csv(out / "results.csv")) == 1
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["failed"][0]["dataset"] == "missing_dataset"


def test_nn_run_and_report(tmp_path):
    out = tmp_path / "nn"
    assert main(["run", "--dataset", "haberman", "--classifier", "nn", "--runs", "2",
                 "--epochs", "5", "--out", str(out)]) == 0
    loss = read_loss_csv(out / "loss_epoch.csv")
    assert len(loss) == 3 * 2 * 5
    assert all(np.isfinite(l) for *_, l in loss)
    assert main(["report", str(out)]) == 0
    report = (out / "report.md").read_text()
    assert TABLE_HEADER in report
    assert (out / "figures" / "loss_haberman.svg").is_file()
    assert (out / "figures" / "pr_haberman.svg").is_file()
    assert "Early-epoch loss" in report


def test_report_minimal(tmp_path):
    (tmp_path / "results.csv").write_text(
        "dataset,classifier,scenario,run,seed,accuracy\nhaberman,svm,none,0,1,0.75\n")
    assert main(["report", str(tmp_path)]) == 0
    rows = [l for l in (tmp_path / "report.md").read_text().splitlines()
            if l.startswith("| Haberman")]
    assert rows == ["| Haberman's Survival | No Curriculum | 75.000 | 75.000 | 75.000 ±0.000 |"]


def test_report_multiclass_confusion(tmp_path):
    (tmp_path / "results.csv").write_text(
        "dataset,classifier,scenario,run,seed,accuracy\ntoy,rf,none,0,1,0.5\n")
    d = tmp_path / "details" / "toy" / "rf" / "none"
    d.mkdir(parents=True)
    (d / "confusion.csv").write_text("true\\pred,a,b,c\na,2,0,0\nb,0,1,1\nc,0,0,2\n")
    assert main(["report", str(tmp_path)]) == 0
    assert (tmp_path / "figures" / "confusion_toy_none.svg").is_file()


@pytest.mark.parametrize("content", [None, "dataset,classifier,scenario,run,seed,accuracy\n"])
def test_report_empty_dir(tmp_path, content):
    if content is not None:
        (tmp_path / "results.csv").write_text(content)
    assert main(["report", str(tmp_path)]) == 5
