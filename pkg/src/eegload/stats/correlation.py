"""Plain, gender-weighted and partial correlation."""

import math
from dataclasses import dataclass

import numpy as np

from .distributions import t_two_sided
from .inference import DegenerateError


@dataclass
class Correlation:
    r: float
    p_value: float
    n: int
    n_eff: float


def gender_weights(genders):
    """Per-participant weight ``N / (G * N_g)``; G is the number of groups present.

    With two groups this is ``N / (2 N_g)`` and the weights sum to N, so each
    group carries equal total weight.
    """
    genders = np.asarray(genders)
    if genders.size == 0:
        raise ValueError("no participants")
    levels, inverse, counts = np.unique(genders, return_inverse=True, return_counts=True)
    return genders.size / (levels.size * counts[inverse].astype(np.float64))


def _p_from_r(r, n_eff):
    df = n_eff - 2.0
    if df <= 0:
        return float("nan")
    if abs(r) >= 1.0:
        return 0.0
    t = r * math.sqrt(df / (1.0 - r * r))
    return t_two_sided(t, df)


def _weighted_r(x, y, w):
    mx, my = np.sum(w * x) / np.sum(w), np.sum(w * y) / np.sum(w)
    dx, dy = x - mx, y - my
    sxx, syy = np.sum(w * dx * dx), np.sum(w * dy * dy)
    scale_x = max(1.0, float(np.sum(w * x * x)))
    scale_y = max(1.0, float(np.sum(w * y * y)))
    if sxx <= 1e-24 * scale_x or syy <= 1e-24 * scale_y:
        raise DegenerateError("zero variance in x or y")
    return float(np.clip(np.sum(w * dx * dy) / math.sqrt(sxx * syy), -1.0, 1.0))


def _check(x, y, w=None):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D and equal length")
    if x.size < 3:
        raise ValueError("need at least 3 observations")
    if w is not None:
        w = np.asarray(w, dtype=np.float64)
        if w.shape != x.shape:
            raise ValueError("weights must match x")
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be positive and finite")
    return x, y, w


def pearson(x, y):
    """Pearson r with the t-approximation p-value (df = n - 2)."""
    x, y, _ = _check(x, y)
    r = _weighted_r(x, y, np.ones_like(x))
    return Correlation(r, _p_from_r(r, x.size), x.size, float(x.size))


def weighted_pearson(x, y, w):
    """Weighted Pearson r; p uses ``sum(w)`` as the effective sample size.

    Weights are normalized by their mean before computing r, so constant
    weights reproduce the unweighted r bit for bit.
    """
    x, y, w = _check(x, y, w)
    r = _weighted_r(x, y, w / w.mean())
    n_eff = float(w.sum())
    return Correlation(r, _p_from_r(r, n_eff), x.size, n_eff)


def partial_correlation(r12, r13, r23):
    """Correlation of variables 1 and 2 with variable 3 partialled out."""
    denom = (1.0 - r13 * r13) * (1.0 - r23 * r23)
    if denom <= 0:
        raise DegenerateError("|r13| or |r23| equals 1")
    return (r12 - r13 * r23) / math.sqrt(denom)
