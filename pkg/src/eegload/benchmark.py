"""Benchmark orchestration: work items, label permutation, summaries and results IO."""

import csv
import json
import logging
import os

import numpy as np

from . import evaluation as ev
from .io import FeatureTable
from .models import FAMILIES, ModelSpec

logger = logging.getLogger(__name__)

RESULTS_FILE = "results.jsonl"
SKIPS_FILE = "skips.json"
SUMMARY_FILE = "summary.csv"
SUMMARY_TEXT = "summary.txt"
META_FILE = "run.json"


def permute_labels(table, seed):
    """Shuffle condition labels across epochs within each participant.

    Windows keep the label of their epoch, so the grouping structure is
    untouched and every model sees chance-level data.
    """
    condition = table.condition.copy()
    for p in np.unique(table.participant):
        mask = table.participant == p
        epochs, first = np.unique(table.epoch_id[mask], return_index=True)
        labels = table.condition[mask][first]
        rng = np.random.default_rng(ev.derive_seed(seed, p, "permute"))
        shuffled = labels[rng.permutation(labels.size)]
        pos = np.searchsorted(epochs, table.epoch_id[mask])
        condition[mask] = shuffled[pos]
    return FeatureTable(table.participant, table.epoch_id, table.window_id, condition, table.X)


def _run_item(data, task, spec, seed, preset, group_by_epoch):
    try:
        res = ev.nested_cv(data, task, spec, seed=seed, preset=preset, group_by_epoch=group_by_epoch)
        return res.to_record(), None
    except ev.SkipParticipant as exc:
        return None, {"participant": data.participant, "task": task, "model": spec.family,
                      "preset": preset, "reason": str(exc)}


def run_benchmark(table, tasks=None, families=None, seed=0, preset="all", grids=None, jobs=1,
                  group_by_epoch=True):
    """Nested CV for every (participant, task, model) item.

    Items are enumerated in a fixed order (participants sorted, then tasks,
    then families) and results are returned in that order whatever ``jobs``
    is, so written files do not depend on parallelism.
    """
    tasks = list(tasks or ev.TASKS)
    families = list(families or FAMILIES)
    grids = grids or {}
    specs = {f: ModelSpec(f, grids.get(f), seed) for f in families}
    participants = sorted(np.unique(table.participant).tolist())
    per_participant = {p: ev.ParticipantWindows.from_table(table, p) for p in participants}
    items = [(per_participant[p], t, specs[f], seed, preset, group_by_epoch)
             for p in participants for t in tasks for f in families]
    logger.info("running %d work items with %d job(s)", len(items), jobs)
    if jobs == 1:
        out = [_run_item(*it) for it in items]
    else:
        from joblib import Parallel, delayed
        out = Parallel(n_jobs=jobs)(delayed(_run_item)(*it) for it in items)
    records = [r for r, _ in out if r is not None]
    skips = [s for _, s in out if s is not None]
    return records, skips


def summarize(records):
    """Study-level rows: mean and sd across participants per (task, model)."""
    groups = {}
    for r in records:
        groups.setdefault((r["task"], r["model"]), []).append(r["aggregates"])
    task_order = {t: i for i, t in enumerate(ev.TASKS)}
    model_order = {m: i for i, m in enumerate(FAMILIES)}
    rows = []
    for (task, model), aggs in sorted(groups.items(), key=lambda kv: (task_order.get(kv[0][0], 99),
                                                                     model_order.get(kv[0][1], 99))):
        row = {"task": task, "model": model, "n_participants": len(aggs)}
        for key in ("cv_max", "mean_macro_f1", "mean_accuracy"):
            v = np.array([a[key] for a in aggs])
            name = key.replace("mean_", "")
            row[f"{name}_mean"] = float(v.mean())
            row[f"{name}_sd"] = float(v.std(ddof=1)) if v.size > 1 else 0.0
        rows.append(row)
    return rows


SUMMARY_COLUMNS = ("task", "model", "n_participants", "cv_max_mean", "cv_max_sd", "macro_f1_mean",
                   "macro_f1_sd", "accuracy_mean", "accuracy_sd")


def write_csv(rows, path, columns):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow(["" if row.get(c) is None else (repr(row[c]) if isinstance(row[c], float) else row[c])
                        for c in columns])


def format_summary(rows):
    """Plain-text table: models as rows, tasks as columns, 'mean ± sd' in percent."""
    tasks = [t for t in ev.TASKS if any(r["task"] == t for r in rows)]
    models = [m for m in FAMILIES if any(r["model"] == m for r in rows)]
    cell = {(r["task"], r["model"]): r for r in rows}
    lines = []
    for metric, label in (("cv_max", "cv_max (%)"), ("macro_f1", "macro F1 (%)")):
        header = [label.ljust(24)] + [t.rjust(16) for t in tasks]
        lines.append("".join(header))
        for m in models:
            parts = [m.ljust(24)]
            for t in tasks:
                r = cell.get((t, m))
                txt = "-" if r is None else f"{100 * r[metric + '_mean']:.1f} ± {100 * r[metric + '_sd']:.1f}"
                parts.append(txt.rjust(16))
            lines.append("".join(parts))
        lines.append("")
    return "\n".join(lines)


def write_results(out_dir, records, skips, meta, figures=True):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, RESULTS_FILE), "w") as fh:
        for r in records:
            fh.write(json.dumps(r, sort_keys=True, allow_nan=False) + "\n")
    with open(os.path.join(out_dir, SKIPS_FILE), "w") as fh:
        json.dump(skips, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(out_dir, META_FILE), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    rows = summarize(records)
    write_csv(rows, os.path.join(out_dir, SUMMARY_FILE), SUMMARY_COLUMNS)
    with open(os.path.join(out_dir, SUMMARY_TEXT), "w") as fh:
        fh.write(format_summary(rows))
    if figures and rows:
        from .plotting import plot_benchmark_summary
        plot_benchmark_summary(rows, os.path.join(out_dir, "fig_cv_max.png"))
    return rows


def load_results(path):
    """Records from a results directory (or a results.jsonl file)."""
    file = os.path.join(path, RESULTS_FILE) if os.path.isdir(path) else path
    if not os.path.exists(file):
        raise FileNotFoundError(f"no results found at {file}")
    records = []
    with open(file) as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.strip():
                try:
                    records.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise ValueError(f"{file}: line {lineno}: {exc.msg}") from None
    return records


def load_meta(path):
    file = os.path.join(path, META_FILE)
    if not os.path.exists(file):
        return {}
    with open(file) as fh:
        return json.load(fh)
