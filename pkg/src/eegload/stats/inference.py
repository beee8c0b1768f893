"""Hypothesis tests used for the individual-differences analysis and preset comparison."""

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .distributions import chi2_sf, f_sf, norm_ppf, norm_sf, t_two_sided


class DegenerateError(ValueError):
    """Input for which the statistic is undefined (e.g. zero variance)."""


@dataclass
class TestReport:
    test: str
    statistic: float | None
    df: tuple = ()
    p_value: float | None = None
    effect_size: float | None = None
    n: int = 0
    degenerate: bool = False
    note: str = ""
    extra: dict = field(default_factory=dict)

    __test__ = False  # not a pytest class

    def as_dict(self):
        return asdict(self)


def _clip_p(p):
    return float(min(1.0, max(0.0, p)))


def _rankdata(x):
    """Average ranks (1-based) and the tie-group sizes."""
    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    ranks = np.empty(x.size)
    ties = []
    i = 0
    while i < x.size:
        j = i
        while j + 1 < x.size and xs[j + 1] == xs[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        if j > i:
            ties.append(j - i + 1)
        i = j + 1
    return ranks, np.array(ties, dtype=np.float64)


# Shapiro-Wilk coefficients (Royston 1995 approximation)
_C1 = (0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_C3 = (0.5440, -0.39978, 0.025054, -6.714e-4)
_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_C6 = (-0.4803, -0.082676, 0.0030302)
_G = (-2.273, 0.459)


def _poly(c, x):
    out = 0.0
    for coef in reversed(c):
        out = out * x + coef
    return out


def shapiro_wilk(x):
    """Shapiro-Wilk W with Royston's coefficient and p-value approximations."""
    x = np.sort(np.asarray(x, dtype=np.float64))
    n = x.size
    if not 3 <= n <= 5000:
        raise ValueError(f"Shapiro-Wilk needs 3 <= n <= 5000, got {n}")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite values")
    rng = x[-1] - x[0]
    if rng <= 1e-12 * max(1.0, abs(x[0])):
        raise DegenerateError("constant sample")
    half = n // 2
    a = np.zeros(half)
    if n == 3:
        a[0] = math.sqrt(0.5)
    else:
        m = np.array([norm_ppf((i + 1 - 0.375) / (n + 0.25)) for i in range(half)])
        summ2 = 2.0 * np.sum(m * m)
        ssumm2 = math.sqrt(summ2)
        rsn = 1.0 / math.sqrt(n)
        a1 = _poly(_C1, rsn) - m[0] / ssumm2
        if n > 5:
            a2 = -m[1] / ssumm2 + _poly(_C2, rsn)
            fac = math.sqrt((summ2 - 2 * m[0] ** 2 - 2 * m[1] ** 2) / (1 - 2 * a1 ** 2 - 2 * a2 ** 2))
            a[1] = a2
            start = 2
        else:
            fac = math.sqrt((summ2 - 2 * m[0] ** 2) / (1 - 2 * a1 ** 2))
            start = 1
        a[0] = a1
        a[start:] = -m[start:] / fac
    xc = (x - x.mean()) / rng
    ssq = float(np.sum(xc * xc))
    num = float(np.sum(a * (xc[::-1][:half] - xc[:half])))
    w = min(1.0, num * num / ssq)

    if n == 3:
        p = max(0.0, 6.0 / math.pi * (math.asin(math.sqrt(w)) - math.pi / 3.0))
    elif w >= 1.0:
        p = 1.0
    else:
        w1 = math.log(1.0 - w)
        if n <= 11:
            gamma = _poly(_G, n)
            if w1 >= gamma:
                p = 0.0
            else:
                y = -math.log(gamma - w1)
                p = norm_sf((y - _poly(_C3, n)) / math.exp(_poly(_C4, n)))
        else:
            ln = math.log(n)
            p = norm_sf((w1 - _poly(_C5, ln)) / math.exp(_poly(_C6, ln)))
    return TestReport("shapiro_wilk", w, (), _clip_p(p), n=n)


def chi2_independence(table):
    """Pearson chi-square test of independence for an r x c count table."""
    t = np.asarray(table, dtype=np.float64)
    if t.ndim != 2 or t.shape[0] < 2 or t.shape[1] < 2:
        raise ValueError(f"need at least a 2x2 table, got shape {t.shape}")
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise ValueError("counts must be finite and non-negative")
    rows, cols = t.sum(1), t.sum(0)
    if np.any(rows == 0) or np.any(cols == 0):
        raise ValueError("table has an all-zero row or column")
    total = t.sum()
    expected = np.outer(rows, cols) / total
    stat = float(np.sum((t - expected) ** 2 / expected))
    df = (t.shape[0] - 1) * (t.shape[1] - 1)
    cramers_v = math.sqrt(stat / (total * (min(t.shape) - 1)))
    return TestReport("chi2_independence", stat, (df,), _clip_p(chi2_sf(stat, df)), cramers_v,
                      n=int(round(total)), extra={"expected": expected.tolist()})


def _rss_rank(D, y):
    coef, _, rank, _ = np.linalg.lstsq(D, y, rcond=None)
    r = y - D @ coef
    return float(r @ r), int(rank)


def anova_with_covariate(y, group, covariate=None):
    """F test for ``group`` in the linear model ``y ~ group + covariate``.

    Type II sum of squares: the group effect is tested after the
    covariate. A constant (or absent) covariate is dropped, which reduces
    the test to one-way ANOVA. Effect size is partial eta squared.
    """
    y = np.asarray(y, dtype=np.float64)
    group = np.asarray(group)
    n = y.size
    levels, counts = np.unique(group, return_counts=True)
    if levels.size < 2:
        raise ValueError("need at least two groups")
    if np.any(counts < 2):
        raise ValueError("every group needs at least two observations")
    base = [np.ones(n)]
    note = ""
    if covariate is not None:
        cov = np.asarray(covariate, dtype=np.float64)
        if np.ptp(cov) > 0:
            base.append(cov - cov.mean())
        else:
            note = "constant covariate dropped"
    dummies = [(group == g).astype(np.float64) for g in levels[1:]]
    reduced = np.column_stack(base)
    full = np.column_stack(base + dummies)
    rss_red, rank_red = _rss_rank(reduced, y)
    rss_full, rank_full = _rss_rank(full, y)
    df1, df2 = rank_full - rank_red, n - rank_full
    scale = max(1.0, float(np.sum((y - y.mean()) ** 2)))
    if df1 == 0 or df2 <= 0 or rss_full <= 1e-24 * scale:
        return TestReport("anova_with_covariate", None, (df1, df2), None, n=n, degenerate=True,
                          note=(note + "; " if note else "") + "singular design or zero residual variance")
    ss_group = max(rss_red - rss_full, 0.0)
    F = (ss_group / df1) / (rss_full / df2)
    return TestReport("anova_with_covariate", F, (df1, df2), _clip_p(f_sf(F, df1, df2)),
                      ss_group / (ss_group + rss_full), n=n, note=note)


def kruskal_wallis(groups):
    """Kruskal-Wallis H with tie correction; p from chi-square(k - 1)."""
    groups = [np.asarray(g, dtype=np.float64).ravel() for g in groups]
    if len(groups) < 2:
        raise ValueError("need at least two groups")
    if any(g.size == 0 for g in groups):
        raise ValueError("empty group")
    allv = np.concatenate(groups)
    N = allv.size
    if N < 5:
        raise ValueError(f"need a total of at least 5 observations, got {N}")
    ranks, ties = _rankdata(allv)
    correction = 1.0 - np.sum(ties ** 3 - ties) / (N ** 3 - N)
    if correction <= 0:
        raise DegenerateError("all values tied")
    h, start = 0.0, 0
    for g in groups:
        r = ranks[start:start + g.size]
        h += r.sum() ** 2 / g.size
        start += g.size
    H = (12.0 / (N * (N + 1)) * h - 3.0 * (N + 1)) / correction
    df = len(groups) - 1
    return TestReport("kruskal_wallis", float(H), (df,), _clip_p(chi2_sf(H, df)),
                      float(H / (N - 1)), n=N)


def paired_t(a, b):
    """Paired t-test on ``a - b``; effect size is Cohen's d of the differences."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("paired samples must be 1-D and equal length")
    n = a.size
    if n < 2:
        raise ValueError("need at least two pairs")
    d = a - b
    mean, sd = float(d.mean()), float(d.std(ddof=1))
    if sd <= 1e-12 * max(1.0, abs(mean)):
        return TestReport("paired_t", None, (n - 1,), None, n=n, degenerate=True,
                          note="zero-variance differences", extra={"mean_diff": mean})
    t = mean / (sd / math.sqrt(n))
    return TestReport("paired_t", t, (n - 1,), _clip_p(t_two_sided(t, n - 1)), mean / sd, n=n,
                      extra={"mean_diff": mean})


def _signed_rank_counts(doubled_ranks):
    # number of sign patterns giving each value of 2 * W+
    total = int(doubled_ranks.sum())
    counts = np.zeros(total + 1)
    counts[0] = 1.0
    for r in doubled_ranks:
        counts[r:] = counts[r:] + counts[:total + 1 - r].copy()
    return counts


def wilcoxon_signed_rank(d, exact_max_n=25):
    """Wilcoxon signed-rank test on paired differences ``d``.

    Zero differences are dropped. The statistic is the sum of ranks of the
    positive differences. The null distribution is enumerated exactly for
    n <= ``exact_max_n`` (tied ranks included); above that a normal
    approximation with tie and continuity corrections is used.
    """
    d = np.asarray(d, dtype=np.float64).ravel()
    d = d[d != 0]
    n = d.size
    if n == 0:
        return TestReport("wilcoxon", None, (), None, n=0, degenerate=True, note="all differences zero")
    ranks, ties = _rankdata(np.abs(d))
    w = float(ranks[d > 0].sum())
    if n <= exact_max_n:
        doubled = np.rint(2 * ranks).astype(np.int64)
        counts = _signed_rank_counts(doubled)
        probs = counts / counts.sum()
        k = int(round(2 * w))
        p = 2.0 * min(probs[:k + 1].sum(), probs[k:].sum())
        method = "exact"
    else:
        mean = n * (n + 1) / 4.0
        var = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(ties ** 3 - ties) / 48.0
        z = max(abs(w - mean) - 0.5, 0.0) / math.sqrt(var)
        p = 2.0 * norm_sf(z)
        method = "normal"
    return TestReport("wilcoxon", w, (), _clip_p(p), n=n, note=method)
