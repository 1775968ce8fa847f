"""Render a results directory into ``report.md`` plus SVG figures."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import plotting
from .data import DATASETS, display_name
from .harness import (CLASSIFIER_LABELS, CLASSIFIERS, SCENARIO_LABELS, SCENARIOS,
                      aggregate_table, read_confusion_csv, read_loss_csv, read_pr_csv,
                      read_results_csv)
from .metrics import AggregateStats

TABLE_HEADER = "| Dataset | Test Scenario | Worst % | Best % | Average ± σ |"
TABLE_RULE = "|---|---|---:|---:|---:|"


class ReportError(RuntimeError):
    pass


def _dataset_order(names):
    known = [n for n in DATASETS if n in names]
    return known + sorted(n for n in names if n not in DATASETS)


def format_table(table: dict, classifier: str) -> list[str]:
    """Markdown rows in the Worst/Best/Average layout, best average in bold."""
    lines = [f"### {CLASSIFIER_LABELS[classifier]} results with and without DDCL", "",
             TABLE_HEADER, TABLE_RULE]
    for dataset in _dataset_order([d for d in table if classifier in table[d]]):
        by_scenario = table[dataset][classifier]
        present = [s for s in SCENARIOS if s in by_scenario]
        avgs = [by_scenario[s]["avg"] for s in present]
        # bold only a unique best average
        top = present[int(np.argmax(avgs))] if avgs.count(max(avgs)) == 1 else None
        for i, scenario in enumerate(present):
            st = by_scenario[scenario]
            cells = [SCENARIO_LABELS[scenario],
                     *AggregateStats(st["worst"], st["best"], st["avg"], st["sigma"]).format_row()]
            if scenario == top and len(present) > 1:
                cells = [f"**{c}**" for c in cells]
            name = display_name(dataset) if i == 0 else ""
            lines.append("| " + " | ".join([name, *cells]) + " |")
    lines.append("")
    return lines


def _loss_summary(loss_rows):
    """dataset -> scenario -> (epochs, mean, std), plus per-run epoch-5 losses."""
    curves: dict = {}
    early: dict = {}
    grouped: dict = {}
    for dataset, scenario, run, epoch, loss in loss_rows:
        grouped.setdefault((dataset, scenario), {}).setdefault(epoch, []).append(loss)
        if epoch == 5:
            early.setdefault(dataset, {}).setdefault(scenario, {})[run] = loss
    for (dataset, scenario), by_epoch in grouped.items():
        epochs = np.array(sorted(by_epoch))
        vals = [np.asarray(by_epoch[e]) for e in epochs]
        curves.setdefault(dataset, {})[scenario] = (
            epochs, np.array([v.mean() for v in vals]), np.array([v.std() for v in vals]))
    return curves, early


def convergence_lines(early: dict) -> list[str]:
    lines = ["## Early-epoch loss (epoch 5)", "",
             "| Dataset | Scenario | Median loss | Runs at or below No Curriculum |",
             "|---|---|---:|---:|"]
    for dataset in _dataset_order(list(early)):
        by_s = early[dataset]
        base = by_s.get("none", {})
        for scenario in [s for s in SCENARIOS if s in by_s]:
            runs = by_s[scenario]
            med = float(np.median(list(runs.values())))
            if scenario != "none" and base:
                shared = [r for r in runs if r in base]
                wins = sum(runs[r] <= base[r] for r in shared)
                cmp = f"{wins}/{len(shared)}"
            else:
                cmp = "-"
            lines.append(f"| {display_name(dataset)} | {SCENARIO_LABELS[scenario]} | {med:.4f} | {cmp} |")
    lines.append("")
    return lines


def render_report(results_dir, out_dir=None) -> Path:
    results_dir = Path(results_dir)
    out_dir = Path(out_dir) if out_dir else results_dir
    results_csv = results_dir / "results.csv"
    if not results_csv.is_file():
        raise ReportError(f"no results.csv in {results_dir}")
    rows = read_results_csv(results_csv)
    if not rows:
        raise ReportError(f"{results_csv} holds no runs")
    table = aggregate_table(rows)
    fig_dir = out_dir / "figures"
    fig_dir.mkdir(parents=True, exist_ok=True)

    lines = ["# DDCL reproduction report", ""]
    n_runs = {len({r["run"] for r in rows if (r["dataset"], r["classifier"], r["scenario"]) == k})
              for k in {(r["dataset"], r["classifier"], r["scenario"]) for r in rows}}
    lines += [f"Runs per cell: {', '.join(map(str, sorted(n_runs)))}. "
              "Accuracies are test-split percentages; σ is the population standard deviation.", ""]
    for clf in CLASSIFIERS:
        if any(clf in table[d] for d in table):
            lines += format_table(table, clf)

    figures = []
    loss_csv = results_dir / "loss_epoch.csv"
    if loss_csv.is_file():
        curves, early = _loss_summary(read_loss_csv(loss_csv))
        for dataset in _dataset_order(list(curves)):
            path = fig_dir / f"loss_{dataset}.svg"
            plotting.plot_loss_curves(curves[dataset], path,
                                      title=f"Error loss per epoch: {display_name(dataset)}")
            figures.append(path)
        if early:
            lines += convergence_lines(early)

    details = results_dir / "details"
    if details.is_dir():
        for ds_dir in sorted(p for p in details.iterdir() if p.is_dir()):
            dataset = ds_dir.name
            clf_dirs = [ds_dir / c for c in CLASSIFIERS if (ds_dir / c).is_dir()]
            if not clf_dirs:
                continue
            clf_dir = clf_dirs[0]  # nn first when present
            pr = {s: read_pr_csv(clf_dir / s / "pr_curve.csv")
                  for s in SCENARIOS if (clf_dir / s / "pr_curve.csv").is_file()}
            if pr:
                path = fig_dir / f"pr_{dataset}.svg"
                plotting.plot_pr_curves(pr, path, title=display_name(dataset))
                figures.append(path)
            else:
                for s in SCENARIOS:
                    cm = clf_dir / s / "confusion.csv"
                    if cm.is_file():
                        names, counts = read_confusion_csv(cm)
                        if len(names) > 2:
                            path = fig_dir / f"confusion_{dataset}_{s}.svg"
                            plotting.plot_confusion(counts, names, path,
                                                    title=f"{display_name(dataset)}: {SCENARIO_LABELS[s]}")
                            figures.append(path)

    if figures:
        lines += ["## Figures", ""]
        lines += [f"- [{p.name}](figures/{p.name})" for p in figures]
        lines.append("")
    report = out_dir / "report.md"
    report.write_text("\n".join(lines), encoding="utf-8")
    (out_dir / "report_tables.json").write_text(json.dumps(table, indent=2, sort_keys=True) + "\n")
    return report
