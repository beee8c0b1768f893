"""Frozen feature catalog.

The column order below is a public contract: feature tables, model inputs
and the ``list-features`` command all follow it. Names read
``family.metric[.descriptor]`` with families ``t`` (temporal, 13),
``sp`` (spectral, 22) and ``ts`` (temporal-spectral, 108).

The six regional asymmetry pairs (F4/F3, FT8/FT7, P4/P3 for alpha and
theta) are a project choice; the literature names only examples of
regional indices.
"""

BANDS = ("delta", "theta", "alpha", "beta", "gamma")

TEMPORAL_METRICS = (
    "mean", "sd", "min", "max", "peak", "outlier_ratio", "rms",
    "zero_crossing_rate", "skewness", "kurtosis",
    "hjorth_activity", "hjorth_mobility", "hjorth_complexity",
)

# (name, numerator bands, denominator bands)
SPECTRAL_RATIOS = (
    ("alpha_theta", ("alpha",), ("theta",)),
    ("theta_alpha", ("theta",), ("alpha",)),
    ("alpha_beta", ("alpha",), ("beta",)),
    ("theta_beta", ("theta",), ("beta",)),
    ("thetaalpha_beta", ("theta", "alpha"), ("beta",)),
    ("thetaalpha_alphabeta", ("theta", "alpha"), ("alpha", "beta")),
)

REGIONAL_ASYMMETRIES = (
    ("alpha", "frontal"), ("theta", "frontal"),
    ("alpha", "frontotemporal"), ("theta", "frontotemporal"),
    ("alpha", "parietal"), ("theta", "parietal"),
)

# Per-channel metrics aggregated across channels.
CHANNEL_METRICS = BANDS + (
    "alpha_beta", "theta_beta", "thetaalpha_beta", "thetaalpha_alphabeta",
)

DESCRIPTORS = (
    "mean", "sd", "min", "max", "median", "iqr", "cv", "skewness",
    "kurtosis", "entropy", "abs_peak", "outlier_ratio_5sd",
)


def _build():
    names = [f"t.{m}" for m in TEMPORAL_METRICS]
    names += [f"sp.{b}.power" for b in BANDS]
    names += [f"sp.{b}_asy.global" for b in BANDS]
    names += [f"sp.ratio.{r[0]}" for r in SPECTRAL_RATIOS]
    names += [f"sp.{b}_asy.{region}" for b, region in REGIONAL_ASYMMETRIES]
    names += [f"ts.{m}.{d}" for m in CHANNEL_METRICS for d in DESCRIPTORS]
    return tuple(names)


FEATURE_NAMES = _build()
N_FEATURES = len(FEATURE_NAMES)

assert N_FEATURES == 143
