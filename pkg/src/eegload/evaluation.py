"""Participant-wise nested stratified cross-validation and metrics.

Windows overlap by 50 % inside an epoch, so folds are drawn over epochs:
all windows of an epoch land in the same fold. ``group_by_epoch=False``
switches to window-level folding for ablations.
"""

import zlib
from dataclasses import dataclass, field

import numpy as np

from . import models
from .stats import paired_t, wilcoxon_signed_rank

TASKS = {
    "multi_357": ("L3", "L5", "L7"),
    "bin_35": ("L3", "L5"),
    "bin_37": ("L3", "L7"),
    "bin_57": ("L5", "L7"),
}
BINARY_TASKS = ("bin_35", "bin_37", "bin_57")
MIN_K, MAX_K = 2, 5


class SkipParticipant(Exception):
    """Not enough data to cross-validate; carries the reason."""


@dataclass(frozen=True)
class TaskDef:
    name: str
    conditions: tuple

    @classmethod
    def named(cls, name):
        if name not in TASKS:
            raise ValueError(f"unknown task {name!r}; known: {list(TASKS)}")
        return cls(name, TASKS[name])


def derive_seed(*parts):
    """Stable 31-bit seed from arbitrary parts (independent of PYTHONHASHSEED)."""
    return zlib.crc32("|".join(map(str, parts)).encode()) & 0x7FFFFFFF


def choose_k(labels):
    """Fold count: the smallest class size clamped to [2, 5]."""
    _, counts = np.unique(np.asarray(labels), return_counts=True)
    if counts.size < 2:
        raise SkipParticipant(f"only {counts.size} class present")
    smallest = int(counts.min())
    if smallest < MIN_K:
        raise SkipParticipant(f"smallest class has {smallest} sample(s); need at least {MIN_K}")
    return min(max(smallest, MIN_K), MAX_K)


def stratified_kfold(labels, k, seed, ids=None):
    """Fold index (0..k-1) for every sample.

    Samples are put in canonical order (by ``ids`` when given), shuffled per
    class with ``seed`` and dealt round-robin, so each fold holds the floor
    or ceiling of its proportional share of every class. The partition
    depends only on (labels, seed, canonical order).
    """
    labels = np.asarray(labels)
    n = labels.size
    if k < 2:
        raise ValueError("k must be at least 2")
    classes, counts = np.unique(labels, return_counts=True)
    if counts.size and k > counts.min():
        raise ValueError(f"k={k} exceeds the smallest class count {counts.min()}")
    order = np.arange(n) if ids is None else np.argsort(np.asarray(ids), kind="stable")
    rng = np.random.default_rng(seed)
    folds = np.empty(n, dtype=np.int64)
    offset = 0
    for c in classes:
        members = order[labels[order] == c]
        members = members[rng.permutation(members.size)]
        folds[members] = (np.arange(members.size) + offset) % k
        offset = (offset + members.size) % k
    return folds


def metrics(y_true, y_pred, labels=None):
    """Accuracy, macro F1 and per-class precision/recall/F1.

    Classes listed in ``labels`` but absent from both vectors contribute
    zeros to the macro average.
    """
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.size == 0 or y_true.size != y_pred.size:
        raise ValueError("metrics need equal-length, non-empty inputs")
    if labels is None:
        labels = np.unique(np.concatenate([y_true, y_pred]))
    per_class = {}
    for c in labels:
        tp = np.sum((y_pred == c) & (y_true == c))
        fp = np.sum((y_pred == c) & (y_true != c))
        fn = np.sum((y_pred != c) & (y_true == c))
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[str(c)] = {"precision": float(precision), "recall": float(recall), "f1": float(f1)}
    return {
        "accuracy": float(np.mean(y_true == y_pred)),
        "macro_f1": float(np.mean([v["f1"] for v in per_class.values()])),
        "per_class": per_class,
    }


@dataclass
class ParticipantWindows:
    participant: str
    X: np.ndarray
    condition: np.ndarray
    epoch_id: np.ndarray
    row_id: np.ndarray = None

    def __post_init__(self):
        if self.row_id is None:
            self.row_id = np.arange(len(self.condition))

    @classmethod
    def from_table(cls, table, participant):
        mask = table.participant == participant
        rows = np.flatnonzero(mask)
        return cls(participant, table.X[mask], table.condition[mask], table.epoch_id[mask], rows)


class FitAudit:
    """Records the rows consumed by every fit and the rows it was scored on."""

    def __init__(self):
        self.records = []

    def record(self, context, fit_rows, eval_rows):
        self.records.append({**context, "fit_rows": frozenset(np.asarray(fit_rows).tolist()),
                             "eval_rows": frozenset(np.asarray(eval_rows).tolist())})

    def violations(self):
        """Fits whose rows intersect the rows they are evaluated on."""
        return [r for r in self.records if r["fit_rows"] & r["eval_rows"]]


@dataclass
class FoldResult:
    fold: int
    accuracy: float
    macro_f1: float
    per_class: dict
    chosen_params: dict
    inner_scores: list
    n_train: int
    n_test: int


@dataclass
class CvResult:
    participant: str
    task: str
    family: str
    preset: str = "all"
    folds: list = field(default_factory=list)
    k_outer: int = 0

    @staticmethod
    def _sd(v):
        return float(np.std(v, ddof=1)) if len(v) > 1 else 0.0

    @property
    def accuracies(self):
        return [f.accuracy for f in self.folds]

    @property
    def mean_accuracy(self):
        return float(np.mean(self.accuracies))

    @property
    def sd_accuracy(self):
        return self._sd(self.accuracies)

    @property
    def mean_macro_f1(self):
        return float(np.mean([f.macro_f1 for f in self.folds]))

    @property
    def sd_macro_f1(self):
        return self._sd([f.macro_f1 for f in self.folds])

    @property
    def cv_max(self):
        return float(max(self.accuracies))

    def to_record(self):
        return {
            "participant": self.participant, "task": self.task, "model": self.family,
            "preset": self.preset, "k_outer": self.k_outer,
            "folds": [vars(f) for f in self.folds],
            "aggregates": {
                "mean_accuracy": self.mean_accuracy, "sd_accuracy": self.sd_accuracy,
                "mean_macro_f1": self.mean_macro_f1, "sd_macro_f1": self.sd_macro_f1,
                "cv_max": self.cv_max,
            },
        }

    @classmethod
    def from_record(cls, rec):
        folds = [FoldResult(**f) for f in rec["folds"]]
        return cls(rec["participant"], rec["task"], rec["model"], rec.get("preset", "all"),
                   folds, rec.get("k_outer", len(folds)))


def task_subset(data, task):
    task = task if isinstance(task, TaskDef) else TaskDef.named(task)
    mask = np.isin(data.condition, task.conditions)
    return ParticipantWindows(data.participant, data.X[mask], data.condition[mask],
                              data.epoch_id[mask], data.row_id[mask]), task


def _unit_folds(unit_labels, unit_ids, seed):
    k = choose_k(unit_labels)
    return k, stratified_kfold(unit_labels, k, seed, ids=unit_ids)


def nested_cv(data, task, model_spec, seed=0, preset="all", audit=None, group_by_epoch=True):
    """Nested stratified CV for one participant, task and model family.

    The outer partition depends only on (seed, participant, task), so
    results for different families and presets are paired fold-by-fold.
    Raises SkipParticipant when a class is too small to fold.
    """
    data, task = task_subset(data, task)
    labels = np.asarray(task.conditions)
    if group_by_epoch:
        units, first = np.unique(data.epoch_id, return_index=True)
        unit_labels = data.condition[first]
        mixed = [u for u in units if np.unique(data.condition[data.epoch_id == u]).size > 1]
        if mixed:
            raise ValueError(f"epochs with mixed conditions: {mixed[:5]}")
        row_unit = np.searchsorted(units, data.epoch_id)
    else:
        units = np.arange(len(data.condition))
        unit_labels = data.condition
        row_unit = units
    present = set(np.unique(unit_labels).tolist())
    if present != set(task.conditions):
        raise SkipParticipant(f"conditions present {sorted(present)}, task needs {list(task.conditions)}")

    k_outer, outer = _unit_folds(unit_labels, units, derive_seed(seed, data.participant, task.name, "outer"))
    result = CvResult(data.participant, task.name, model_spec.family, preset, k_outer=k_outer)
    fit_seed = derive_seed(seed, data.participant, task.name, model_spec.family, "fit")
    for f in range(k_outer):
        train_units = np.flatnonzero(outer != f)
        test_rows = np.flatnonzero(outer[row_unit] == f)
        train_rows = np.flatnonzero(outer[row_unit] != f)
        k_inner, inner = _unit_folds(unit_labels[train_units], units[train_units],
                                     derive_seed(seed, data.participant, task.name, "inner", f))
        inner_of_row = np.full(len(row_unit), -1)
        inner_of_row[train_rows] = inner[np.searchsorted(train_units, row_unit[train_rows])]

        scores = []
        for params in model_spec.candidates:
            accs = []
            for g in range(k_inner):
                fit_rows = np.flatnonzero((inner_of_row >= 0) & (inner_of_row != g))
                val_rows = np.flatnonzero(inner_of_row == g)
                hook = None
                if audit is not None:
                    ctx = {"participant": data.participant, "task": task.name,
                           "family": model_spec.family, "outer_fold": f, "inner_fold": g}
                    audit.record({**ctx, "against": "outer_test"}, data.row_id[fit_rows], data.row_id[test_rows])
                    audit.record({**ctx, "against": "inner_val"}, data.row_id[fit_rows], data.row_id[val_rows])
                    hook = _hook(audit, ctx, data.row_id[test_rows])
                model = models.fit(model_spec, params, data.X[fit_rows], data.condition[fit_rows],
                                   seed=fit_seed, row_ids=data.row_id[fit_rows], audit=hook)
                accs.append(float(np.mean(models.predict(model, data.X[val_rows]) == data.condition[val_rows])))
            scores.append(float(np.mean(accs)))
        best = int(np.argmax(scores))  # first maximum: lower grid index wins ties
        params = model_spec.candidates[best]

        hook = None
        if audit is not None:
            ctx = {"participant": data.participant, "task": task.name, "family": model_spec.family,
                   "outer_fold": f, "inner_fold": None}
            audit.record({**ctx, "against": "outer_test"}, data.row_id[train_rows], data.row_id[test_rows])
            hook = _hook(audit, ctx, data.row_id[test_rows])
        model = models.fit(model_spec, params, data.X[train_rows], data.condition[train_rows],
                           seed=fit_seed, row_ids=data.row_id[train_rows], audit=hook)
        y_pred = models.predict(model, data.X[test_rows])
        m = metrics(data.condition[test_rows], y_pred, labels)
        result.folds.append(FoldResult(f, m["accuracy"], m["macro_f1"], m["per_class"], dict(params),
                                       scores, int(train_rows.size), int(test_rows.size)))
    return result


def _hook(audit, ctx, test_rows):
    def consumed(rows):
        audit.record({**ctx, "against": "model_fit"}, rows, test_rows)
    return consumed


PAIRINGS = (("all", "frontal"), ("all", "frontal_parietal"), ("frontal_parietal", "frontal"))
COMPARE_METRICS = ("mean_accuracy", "mean_macro_f1", "cv_max")


def outcome_class(p):
    if p < 0.05:
        return "sig"
    if p < 0.1:
        return "trend"
    return "ns"


def _score_table(results):
    table = {}
    for r in results:
        rec = r.to_record() if isinstance(r, CvResult) else r
        for metric in COMPARE_METRICS:
            table.setdefault((rec["task"], rec["model"], metric), {})[rec["participant"]] = \
                rec["aggregates"][metric]
    return table


def compare_presets(results_all, results_frontal, results_fp):
    """Paired preset comparisons per (task, model, metric, pairing).

    Differences are ``first - second`` of each pairing. Outcome classes
    come from the paired t-test; zero-variance differences are reported as
    ``degenerate``.
    """
    tables = {"all": _score_table(results_all), "frontal": _score_table(results_frontal),
              "frontal_parietal": _score_table(results_fp)}
    keys = sorted(set(tables["all"]) & set(tables["frontal"]) & set(tables["frontal_parietal"]))
    if not keys:
        raise ValueError("no (task, model, metric) cell is shared by all three result sets")
    rows = []
    for task, model, metric in keys:
        cells = {name: t[(task, model, metric)] for name, t in tables.items()}
        participants = sorted(cells["all"])
        for name, c in cells.items():
            if sorted(c) != participants:
                raise ValueError(f"misaligned participants for {task}/{model}: "
                                 f"'all' has {participants}, '{name}' has {sorted(c)}")
        for a_name, b_name in PAIRINGS:
            a = np.array([cells[a_name][p] for p in participants])
            b = np.array([cells[b_name][p] for p in participants])
            d = a - b
            row = {"task": task, "model": model, "metric": metric, "pairing": f"{a_name}_vs_{b_name}",
                   "n": len(participants), "mean_diff": float(d.mean()) if d.size else 0.0,
                   "cohens_d": None, "t": None, "t_p": None, "wilcoxon_w": None, "wilcoxon_p": None}
            t = paired_t(a, b) if d.size >= 2 else None
            if t is None or t.degenerate:
                row["outcome"] = "degenerate"
            else:
                row.update(cohens_d=t.effect_size, t=t.statistic, t_p=t.p_value)
                w = wilcoxon_signed_rank(d)
                if not w.degenerate:
                    row.update(wilcoxon_w=w.statistic, wilcoxon_p=w.p_value)
                row["outcome"] = outcome_class(t.p_value)
            rows.append(row)
    return rows
