"""Matplotlib figures written next to the delimited outputs.

PNG metadata is stripped so identical data gives identical bytes.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_PNG_META = {"Software": None}


def _save(fig, path):
    fig.savefig(path, dpi=100, metadata=_PNG_META)
    plt.close(fig)


def plot_benchmark_summary(rows, path):
    """Grouped bars of mean cv_max (± sd) per task and model."""
    tasks = list(dict.fromkeys(r["task"] for r in rows))
    models = list(dict.fromkeys(r["model"] for r in rows))
    cell = {(r["task"], r["model"]): r for r in rows}
    width = 0.8 / max(len(models), 1)
    fig, ax = plt.subplots(figsize=(8, 4))
    x = np.arange(len(tasks))
    for i, m in enumerate(models):
        mean = [100 * cell[(t, m)]["cv_max_mean"] if (t, m) in cell else np.nan for t in tasks]
        sd = [100 * cell[(t, m)]["cv_max_sd"] if (t, m) in cell else 0.0 for t in tasks]
        ax.bar(x + (i - (len(models) - 1) / 2) * width, mean, width, yerr=sd, capsize=2, label=m)
    ax.set_xticks(x)
    ax.set_xticklabels(tasks)
    ax.set_ylabel("cv_max (%)")
    ax.set_ylim(0, 105)
    ax.legend(fontsize=7, ncol=3, loc="lower right")
    fig.tight_layout()
    _save(fig, path)


def plot_preset_comparison(rows, path, metric="cv_max"):
    """Mean paired difference per (task, model, pairing) with outcome markers."""
    rows = [r for r in rows if r["metric"] == metric]
    pairings = list(dict.fromkeys(r["pairing"] for r in rows))
    cells = list(dict.fromkeys((r["task"], r["model"]) for r in rows))
    lookup = {(r["task"], r["model"], r["pairing"]): r for r in rows}
    fig, ax = plt.subplots(figsize=(max(6, 0.5 * len(cells) + 2), 4))
    width = 0.8 / max(len(pairings), 1)
    x = np.arange(len(cells))
    marks = {"sig": "*", "trend": "+"}
    for i, p in enumerate(pairings):
        vals = [100 * lookup[(t, m, p)]["mean_diff"] if (t, m, p) in lookup else np.nan for t, m in cells]
        pos = x + (i - (len(pairings) - 1) / 2) * width
        ax.bar(pos, vals, width, label=p)
        for xp, (t, m) in zip(pos, cells):
            r = lookup.get((t, m, p))
            if r is not None and r["outcome"] in marks:
                ax.text(xp, 100 * r["mean_diff"], marks[r["outcome"]], ha="center", va="bottom")
    ax.axhline(0, color="black", lw=0.8)
    ax.set_xticks(x)
    ax.set_xticklabels([f"{t}\n{m}" for t, m in cells], fontsize=6, rotation=90)
    ax.set_ylabel(f"mean {metric} difference (points)")
    ax.legend(fontsize=7)
    fig.tight_layout()
    _save(fig, path)


def plot_confusion(matrix, labels, path, title="multinomial logit"):
    """Confusion matrix heat map; rows are true classes."""
    matrix = np.asarray(matrix)
    fig, ax = plt.subplots(figsize=(4, 3.5))
    ax.imshow(matrix, cmap="Blues")
    for i in range(matrix.shape[0]):
        for j in range(matrix.shape[1]):
            ax.text(j, i, str(matrix[i, j]), ha="center", va="center")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels)
    ax.set_yticks(range(len(labels)))
    ax.set_yticklabels(labels)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)


def plot_accuracy_scatter(x, y, xlabel, path):
    fig, ax = plt.subplots(figsize=(4, 3.5))
    ax.scatter(x, y, s=14)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("accuracy at optimal task")
    fig.tight_layout()
    _save(fig, path)
