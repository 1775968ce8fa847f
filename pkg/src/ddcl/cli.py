"""``ddcl`` command line: ingest, curriculum, run, report.

Exit codes: 0 success, 2 dataset ingest failure, 3 configuration error,
4 at least one experiment run failed, 5 report inputs missing.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict, fields, replace
from pathlib import Path

import numpy as np

from . import data as data_mod
from . import harness, plotting
from .curriculum import CurriculumConfig, CurriculumError, build_curriculum, identity_ordering
from .report import ReportError, render_report

EXIT_INGEST, EXIT_CONFIG, EXIT_RUN, EXIT_REPORT = 2, 3, 4, 5

log = logging.getLogger("ddcl")

ORDERING_HEADER = ["rank", "source", "class_id", "quantile", "normalized_distance",
                   "synthetic", "parent_a", "parent_b", "lambda"]


class ConfigError(ValueError):
    pass


DEFAULT_CONFIG = {
    "datasets": list(data_mod.DEFAULT_DATASETS),
    "classifiers": list(harness.CLASSIFIERS),
    "scenarios": list(harness.SCENARIOS),
    "n_runs": 30,
    "master_seed": 0,
    "jobs": 1,
    "out": "results",
    "include_diabetes130": False,
    "curriculum": {},
    "learner": {},
}


def load_config(path) -> dict:
    """Defaults overlaid with a JSON file (when given)."""
    cfg = json.loads(json.dumps(DEFAULT_CONFIG))
    if path:
        try:
            user = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        unknown = set(user) - set(DEFAULT_CONFIG)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(user)
    return cfg


def _section(cls, values: dict, name: str):
    allowed = {f.name for f in fields(cls)}
    unknown = set(values) - allowed
    if unknown:
        raise ConfigError(f"unknown {name} keys: {sorted(unknown)}")
    if "hidden" in values and values["hidden"] is not None:
        values = {**values, "hidden": tuple(values["hidden"])}
    try:
        return cls(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: {exc}") from None


def apply_flags(cfg: dict, args) -> dict:
    """Command-line flags take precedence over the file."""
    cfg = dict(cfg)
    if getattr(args, "dataset", None):
        cfg["datasets"] = [d for item in args.dataset for d in item.split(",")]
    if getattr(args, "classifier", None):
        cfg["classifiers"] = [c for item in args.classifier for c in item.split(",")]
    if getattr(args, "scoring", None):
        cfg["scenarios"] = [s for item in args.scoring for s in item.split(",")]
    for flag, key in (("runs", "n_runs"), ("seed", "master_seed"), ("jobs", "jobs"), ("out", "out")):
        value = getattr(args, flag, None)
        if value is not None:
            cfg[key] = value
    if getattr(args, "include_diabetes130", False):
        cfg["include_diabetes130"] = True
    cur = dict(cfg.get("curriculum") or {})
    if getattr(args, "quantiles", None) is not None:
        cur["quantiles"] = args.quantiles
    cfg["curriculum"] = cur
    learner = dict(cfg.get("learner") or {})
    if getattr(args, "full_batch", False):
        learner["full_batch"] = True
    if getattr(args, "epochs", None) is not None:
        learner["epochs"] = args.epochs
    cfg["learner"] = learner
    return cfg


def validate(cfg: dict) -> dict:
    for key, allowed in (("classifiers", harness.CLASSIFIERS), ("scenarios", harness.SCENARIOS)):
        bad = [v for v in cfg[key] if v not in allowed]
        if bad:
            raise ConfigError(f"unknown {key}: {bad}; choose from {list(allowed)}")
    if int(cfg["n_runs"]) < 1:
        raise ConfigError("n_runs must be >= 1")
    if int(cfg["jobs"]) < 1:
        raise ConfigError("jobs must be >= 1")
    if not cfg["datasets"]:
        raise ConfigError("no datasets selected")
    cur = {k: v for k, v in cfg["curriculum"].items() if k != "scoring"}
    try:
        cfg["_curriculum"] = CurriculumConfig(**cur)
    except TypeError as exc:
        raise ConfigError(f"curriculum: {exc}") from None
    except CurriculumError as exc:
        raise ConfigError(str(exc)) from None
    cfg["_learner"] = _section(harness.LearnerOptions, cfg["learner"], "learner")
    return cfg


def _selected_datasets(cfg):
    names = []
    for name in cfg["datasets"]:
        if name == "diabetes130" and not cfg["include_diabetes130"]:
            log.warning("skipping diabetes130 (pass --include-diabetes130 to run it)")
            continue
        names.append(name)
    return names


# --- subcommands ------------------------------------------------------------------

def cmd_ingest(args) -> int:
    targets = [d for item in (args.dataset or data_mod.DEFAULT_DATASETS) for d in item.split(",")]
    for name in targets:
        try:
            ds = data_mod.load_dataset(name, args.label_col)
        except data_mod.DataError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INGEST
        counts = np.bincount(ds.labels, minlength=ds.n_classes)
        summary = {
            "dataset": name, "rows": ds.n, "features": ds.n_features,
            "classes": {cn: int(c) for cn, c in zip(ds.class_names, counts)},
        }
        print(json.dumps(summary))
    return 0


def cmd_curriculum(args) -> int:
    if not args.dataset:
        print("error: --dataset is required", file=sys.stderr)
        return EXIT_CONFIG
    name = args.dataset[0]
    try:
        ds = data_mod.load_dataset(name, args.label_col)
    except data_mod.DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INGEST
    scoring = (args.scoring or ["density"])[0]
    try:
        file_cfg = load_config(args.config)
        cur = {k: v for k, v in (file_cfg.get("curriculum") or {}).items() if k != "scoring"}
        if args.quantiles is not None:
            cur["quantiles"] = args.quantiles
        seed = args.seed if args.seed is not None else file_cfg["master_seed"]
        if scoring not in ("none", "density", "point"):
            raise ConfigError(f"unknown scoring {scoring!r}")
        cfg = CurriculumConfig(**{**cur, "scoring": "density" if scoring == "none" else scoring,
                                  "seed": seed})
    except (ConfigError, CurriculumError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    parts = data_mod.split(ds, data_mod.SplitSpec(0.7, 0.0, 0.3, seed=seed))
    scaled = data_mod.apply_scaler(ds, data_mod.fit_scaler(ds, parts.train_idx))
    x, y = scaled.features[parts.train_idx], scaled.labels[parts.train_idx]
    ordering = identity_ordering(y) if scoring == "none" else build_curriculum(x, y, cfg)

    out = Path(args.out or f"curriculum_{Path(name).stem}")
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "ordering.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, ORDERING_HEADER, lineterminator="\n")
        w.writeheader()
        for rec in ordering.records():
            if rec["source"] != "":
                rec["source"] = int(parts.train_idx[rec["source"]])
            for key in ("parent_a", "parent_b"):
                if rec[key] != "":
                    rec[key] = int(parts.train_idx[rec[key]])
            w.writerow(rec)
    for cid, est in ordering.densities.items():
        with open(out / f"density_class{cid}.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["y", "density"])
            w.writerows(zip(est.grid.tolist(), est.values.tolist()))
    if ordering.densities:
        plotting.plot_density(ordering.densities, ds.class_names, out / "density.svg",
                              n_bins=cfg.quantiles, title=Path(name).stem)
    print(f"wrote {len(ordering)} ordered samples ({ordering.n_synthetic} synthetic) to {out}")
    return 0


def cmd_run(args) -> int:
    try:
        cfg = validate(apply_flags(load_config(args.config), args))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)

    result_rows, loss_rows = [], []
    completed, failed = [], []
    for name in _selected_datasets(cfg):
        try:
            ds = data_mod.load_dataset(name)
        except data_mod.DataError as exc:
            print(f"error: {exc}", file=sys.stderr)
            failed.append({"dataset": name, "error": str(exc)})
            continue
        for clf in cfg["classifiers"]:
            nn_results = {}
            for scenario in cfg["scenarios"]:
                plan = harness.ExperimentPlan(name, clf, scenario, int(cfg["n_runs"]),
                                              int(cfg["master_seed"]), cfg["_curriculum"],
                                              cfg["_learner"])
                try:
                    results = harness.run_experiment(plan, ds, jobs=int(cfg["jobs"]))
                except harness.ExperimentError as exc:
                    log.error("%s/%s/%s failed: %s", name, clf, scenario, exc)
                    failed.append({"dataset": name, "classifier": clf, "scenario": scenario,
                                   "error": str(exc)})
                    continue
                stats = harness.aggregate(results)
                log.info("%s %s %s: %s", name, clf, scenario, " / ".join(stats.format_row()))
                completed.append({"dataset": name, "classifier": clf, "scenario": scenario,
                                  "runs": len(results)})
                result_rows += [(name, clf, scenario, r) for r in results]
                harness.write_details(out, name, clf, scenario, results, ds.class_names)
                if clf == "nn":
                    nn_results[scenario] = results
            if nn_results:
                loss_rows += harness.export_loss_curves(nn_results, dataset=name)

    harness.write_results_csv(out / "results.csv", result_rows)
    rows = harness.read_results_csv(out / "results.csv")
    harness.write_aggregate_json(out / "aggregate.json", harness.aggregate_table(rows) if rows else {})
    if loss_rows:
        harness.write_loss_csv(out / "loss_epoch.csv", loss_rows)
    manifest = {
        "config": {k: v for k, v in cfg.items() if not k.startswith("_")},
        "curriculum": asdict(cfg["_curriculum"]),
        "learner": asdict(cfg["_learner"]),
        "completed": completed,
        "failed": failed,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=str) + "\n")
    print(f"{len(completed)} experiment cells completed, {len(failed)} failed; results in {out}")
    return EXIT_RUN if failed else 0


def cmd_report(args) -> int:
    results_dir = Path(args.results_dir or args.out or "results")
    try:
        path = render_report(results_dir, args.report_out)
    except ReportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REPORT
    print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ddcl", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--dataset", action="append", help="dataset name or CSV path (repeatable)")
        p.add_argument("--label-col", help="label column name or index (default: last)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int)

    p = sub.add_parser("ingest", help="load datasets and print a summary")
    common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("curriculum", help="write the curriculum ordering of one training split")
    common(p)
    p.add_argument("--scoring", action="append", choices=["density", "point", "none"])
    p.add_argument("--quantiles", type=int)
    p.set_defaults(func=cmd_curriculum)

    p = sub.add_parser("run", help="run the repeated-split experiments")
    common(p)
    p.add_argument("--classifier", action="append", help="nn, svm, rf (repeatable)")
    p.add_argument("--scoring", action="append", help="scenarios: none, density, point")
    p.add_argument("--quantiles", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--full-batch", action="store_true")
    p.add_argument("--include-diabetes130", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="render report.md and SVG figures from a results directory")
    p.add_argument("results_dir", nargs="?")
    p.add_argument("--out", help="results directory (alias of the positional argument)")
    p.add_argument("--report-out", help="where to write the report (default: results directory)")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
