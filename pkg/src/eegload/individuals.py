"""Individual differences: optimal task per participant and the statistics battery."""

import numpy as np

from . import stats
from .evaluation import BINARY_TASKS

VARIABLES = ("age", "sbsod", "ptsot_error", "corsi")
PREDICTORS = ("age", "gender", "sbsod", "ptsot_error", "corsi")
ALPHA = 0.05


def _task_score(recs, score):
    if score == "max_cv_max":
        return max(r["aggregates"]["cv_max"] for r in recs)
    if score == "mean_cv_max":
        return float(np.mean([r["aggregates"]["cv_max"] for r in recs]))
    if score == "max_mean_accuracy":
        return max(r["aggregates"]["mean_accuracy"] for r in recs)
    raise ValueError(f"unknown optimal-task score {score!r}")


def optimal_tasks(records, score="max_cv_max", tasks=BINARY_TASKS):
    """Per participant, the binary task with the highest score.

    With the default score a task is rated by the best model's cv_max.
    Ties go to the lexicographically first task.

    Returns
    -------
    dict
        participant -> {"task", "accuracy", "scores"}
    """
    by = {}
    for r in records:
        if r["task"] in tasks:
            by.setdefault(r["participant"], {}).setdefault(r["task"], []).append(r)
    out = {}
    for pid in sorted(by):
        scores = {t: _task_score(recs, score) for t, recs in sorted(by[pid].items())}
        best = max(scores.values())
        task = min(t for t, s in scores.items() if s == best)
        out[pid] = {"task": task, "accuracy": best, "scores": scores}
    return out


def _describe(values):
    v = np.asarray(values, dtype=np.float64)
    return {"mean": float(v.mean()) if v.size else None,
            "sd": float(v.std(ddof=1)) if v.size > 1 else None, "n": int(v.size)}


def _safe(fn, *args, **kwargs):
    try:
        out = fn(*args, **kwargs)
        return out.as_dict() if hasattr(out, "as_dict") else out
    except ValueError as exc:
        return {"error": str(exc), "degenerate": isinstance(exc, stats.DegenerateError)}


def _group_test(values, groups, gender):
    """ANCOVA (gender covariate) when every group passes Shapiro-Wilk, else Kruskal-Wallis."""
    labels = sorted(set(groups))
    normality = {}
    all_normal = True
    for g in labels:
        v = values[groups == g]
        if v.size < 3:
            normality[g] = {"error": f"n={v.size} too small for Shapiro-Wilk"}
            all_normal = False
            continue
        rep = _safe(stats.shapiro_wilk, v)
        normality[g] = rep
        if "error" in rep or rep["p_value"] <= ALPHA:
            all_normal = False
    if all_normal:
        test = _safe(stats.anova_with_covariate, values, groups, gender)
    else:
        test = _safe(stats.kruskal_wallis, [values[groups == g] for g in labels])
    return {"normality": normality, "all_normal": all_normal, "test": test}


def _correlations(acc, x, gender_code, weights):
    out = {}
    try:
        w = stats.weighted_pearson(acc, x, weights)
        out["weighted"] = {"r": w.r, "p_value": w.p_value, "n": w.n, "n_eff": w.n_eff}
    except ValueError as exc:
        out["weighted"] = {"degenerate": True, "error": str(exc)}
    try:
        p = stats.pearson(acc, x)
        out["pearson"] = {"r": p.r, "p_value": p.p_value, "n": p.n}
    except ValueError as exc:
        out["pearson"] = {"degenerate": True, "error": str(exc)}
    try:
        r12 = stats.pearson(acc, x).r
        r13 = stats.pearson(acc, gender_code).r
        r23 = stats.pearson(x, gender_code).r
        r = stats.partial_correlation(r12, r13, r23)
        df = acc.size - 3
        p = stats.t_two_sided(r * np.sqrt(df / max(1.0 - r * r, 1e-300)), df) if df > 0 else None
        out["partial_gender"] = {"r": float(r), "p_value": p, "df": df}
    except ValueError as exc:
        out["partial_gender"] = {"degenerate": True, "error": str(exc)}
    out["degenerate"] = all(v.get("degenerate", False) for v in out.values() if isinstance(v, dict))
    return out


def analyze(records, profiles, score="max_cv_max"):
    """Run the individual-differences battery.

    Parameters
    ----------
    records : list of dict
        CvResult records (any preset; only binary tasks are used).
    profiles : dict
        participant id -> ParticipantProfile.
    """
    optimal = optimal_tasks(records, score)
    missing = [p for p in optimal if p not in profiles]
    if missing:
        raise ValueError(f"no profile for participant(s): {', '.join(missing)}")
    pids = list(optimal)
    if not pids:
        raise ValueError("no binary-task results to analyse")
    tasks = np.array([optimal[p]["task"] for p in pids])
    acc = np.array([optimal[p]["accuracy"] for p in pids])
    prof = [profiles[p] for p in pids]
    gender = np.array([pr.gender for pr in prof])
    gender_code = (gender == "male").astype(np.float64)
    variables = {v: np.array([float(getattr(pr, v)) for pr in prof]) for v in VARIABLES}
    weights = stats.gender_weights(gender)

    groups = sorted({str(t) for t in tasks})
    descriptives = {}
    for g in groups + ["all"]:
        mask = np.ones(len(pids), bool) if g == "all" else tasks == g
        descriptives[g] = {
            "n": int(mask.sum()),
            "female": int(np.sum(gender[mask] == "female")),
            "male": int(np.sum(gender[mask] == "male")),
            **{v: _describe(variables[v][mask]) for v in VARIABLES},
            "accuracy": _describe(acc[mask]),
        }

    gender_levels = ["female", "male"]
    table = [[int(np.sum((gender == gl) & (tasks == t))) for t in groups] for gl in gender_levels]
    chi2 = _safe(stats.chi2_independence, table)

    group_tests = {v: _group_test(variables[v], tasks, gender_code) if len(groups) >= 2
                   else {"error": "fewer than two optimal-task groups"} for v in VARIABLES}

    correlations = {v: _correlations(acc, variables[v], gender_code, weights) for v in VARIABLES}

    if len(groups) >= 2:
        X = np.column_stack([variables["age"], gender_code, variables["sbsod"],
                             variables["ptsot_error"], variables["corsi"]])
        mnl = _safe(stats.multinomial_logit, X, tasks, feature_names=PREDICTORS)
    else:
        mnl = {"error": "fewer than two optimal-task groups"}

    return {
        "n_participants": len(pids),
        "optimal_task_score": score,
        "participants": [{"participant": p, "gender": profiles[p].gender, **optimal[p]} for p in pids],
        "group_sizes": {g: int(np.sum(tasks == g)) for g in groups},
        "gender_weights": {"female": float(weights[gender == "female"][0]) if np.any(gender == "female") else None,
                           "male": float(weights[gender == "male"][0]) if np.any(gender == "male") else None},
        "descriptives": descriptives,
        "gender_by_task": {"rows": gender_levels, "columns": groups, "counts": table, "test": chi2},
        "group_differences": group_tests,
        "correlations": correlations,
        "multinomial_logit": mnl,
    }


def report_rows(report):
    """Flat rows (one per statistic) for the delimited report."""
    rows = []
    t = report["gender_by_task"]["test"]
    rows.append({"analysis": "gender_x_task", "variable": "gender", "test": "chi2_independence",
                 "statistic": t.get("statistic"), "df": _df(t), "p_value": t.get("p_value"),
                 "effect_size": t.get("effect_size"), "note": t.get("error", "")})
    for v, g in report["group_differences"].items():
        test = g.get("test", g)
        rows.append({"analysis": "group_difference", "variable": v, "test": test.get("test", ""),
                     "statistic": test.get("statistic"), "df": _df(test), "p_value": test.get("p_value"),
                     "effect_size": test.get("effect_size"), "note": test.get("error", test.get("note", ""))})
    for v, c in report["correlations"].items():
        for kind in ("weighted", "pearson", "partial_gender"):
            cc = c[kind]
            rows.append({"analysis": "correlation", "variable": v, "test": kind, "statistic": cc.get("r"),
                         "df": cc.get("df", ""), "p_value": cc.get("p_value"), "effect_size": None,
                         "note": "degenerate: " + cc["error"] if cc.get("degenerate") else ""})
    return rows


def _df(t):
    df = t.get("df")
    return ";".join(str(d) for d in df) if df else ""
