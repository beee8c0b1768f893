"""Canonical 143-dimensional feature vector per 2 s window."""

from dataclasses import dataclass

import numpy as np

from .catalog import (BANDS, CHANNEL_METRICS, DESCRIPTORS, FEATURE_NAMES,
                      N_FEATURES, REGIONAL_ASYMMETRIES, SPECTRAL_RATIOS)
from .montage import REGIONAL_PAIRS, hemisphere_indices
from .spectrum import EPS, asymmetry, band_powers, band_ratios, welch_psd

WINDOW_S = 2.0
WINDOW_OVERLAP = 0.5
TEMPORAL_OUTLIER_SD = 3.0
CHANNEL_OUTLIER_SD = 5.0

_REGION_LABELS = {(region, band): (right, left) for region, band, right, left in REGIONAL_PAIRS}


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    flags: tuple = ()

    names = FEATURE_NAMES

    def __post_init__(self):
        if self.values.shape != (N_FEATURES,):
            raise ValueError(f"feature vector must have {N_FEATURES} values, got {self.values.shape}")

    def as_dict(self):
        return dict(zip(FEATURE_NAMES, self.values.tolist()))


def plan_windows(epoch, window_s=WINDOW_S, overlap=WINDOW_OVERLAP):
    """Sample slices of the sliding windows that fit fully inside ``epoch``."""
    fs = epoch.sampling_rate_hz
    n = epoch.data.shape[-1]
    width = int(round(window_s * fs))
    step = int(round(window_s * (1.0 - overlap) * fs))
    if width > n:
        raise ValueError(f"epoch of {n / fs:.3f} s is shorter than one {window_s} s window")
    return [slice(s, s + width) for s in range(0, n - width + 1, step)]


def _moments(x):
    """Population mean, sd, skewness (Fisher-Pearson) and excess kurtosis along the last axis."""
    mean = x.mean(axis=-1)
    dev = x - mean[..., None]
    m2 = np.mean(dev ** 2, axis=-1)
    sd = np.sqrt(m2)
    flat = sd <= 1e-10 * (np.abs(mean) + EPS)
    safe = np.where(flat, 1.0, m2)
    skew = np.where(flat, 0.0, np.mean(dev ** 3, axis=-1) / safe ** 1.5)
    kurt = np.where(flat, 0.0, np.mean(dev ** 4, axis=-1) / safe ** 2 - 3.0)
    return mean, np.where(flat, 0.0, sd), skew, kurt, flat


def temporal_features(window):
    """The 13 temporal statistics, computed per channel and averaged over channels.

    ``window`` is ``(n_channels, n_samples)`` or a single 1-D trace.
    """
    x = np.atleast_2d(np.asarray(window, dtype=np.float64))
    if x.shape[-1] < 2:
        raise ValueError("window needs at least 2 samples")
    n = x.shape[-1]
    mean, sd, skew, kurt, flat = _moments(x)
    dev = np.abs(x - mean[:, None])
    outlier = np.where(flat, 0.0, np.mean(dev > TEMPORAL_OUTLIER_SD * sd[:, None], axis=-1))
    rms = np.sqrt(np.mean(x ** 2, axis=-1))
    sign = np.signbit(x)
    zcr = np.count_nonzero(sign[:, 1:] != sign[:, :-1], axis=-1) / n

    activity = np.where(flat, 0.0, sd ** 2)
    d1 = np.diff(x, axis=-1)
    d2 = np.diff(d1, axis=-1)
    v1 = np.var(d1, axis=-1)
    v2 = np.var(d2, axis=-1)
    mobility = np.sqrt(np.divide(v1, activity, out=np.zeros_like(v1), where=activity > 0))
    mob_d1 = np.sqrt(np.divide(v2, v1, out=np.zeros_like(v2), where=v1 > 0))
    complexity = np.divide(mob_d1, mobility, out=np.zeros_like(mob_d1), where=mobility > 0)

    per_channel = np.stack([
        mean, sd, x.min(axis=-1), x.max(axis=-1), np.abs(x).max(axis=-1), outlier, rms,
        zcr, skew, kurt, activity, mobility, complexity,
    ])
    return per_channel.mean(axis=1)


def channel_band_powers(window, sampling_rate):
    """Per-channel band powers and ratios of one window."""
    psd = welch_psd(np.atleast_2d(window), sampling_rate)
    powers = band_powers(psd)
    return powers, band_ratios(powers)


def spectral_features(window, channel_names, sampling_rate, powers=None, ratios=None):
    """The 22 spectral features and the flags raised while computing them."""
    if powers is None:
        powers, ratios = channel_band_powers(window, sampling_rate)
    flags = []
    out = [float(np.mean(powers[b])) for b in BANDS]

    left, right = hemisphere_indices(channel_names)
    for b in BANDS:
        if left and right:
            out.append(asymmetry(np.mean(powers[b][left]), np.mean(powers[b][right])))
        else:
            out.append(0.0)
            flags.append(f"sp.{b}_asy.global:missing_hemisphere")

    out += [float(np.mean(ratios[name])) for name, _, _ in SPECTRAL_RATIOS]

    index = {ch: i for i, ch in enumerate(channel_names)}
    for band, region in REGIONAL_ASYMMETRIES:
        right_ch, left_ch = _REGION_LABELS[(region, band)]
        if right_ch in index and left_ch in index:
            out.append(asymmetry(powers[band][index[left_ch]], powers[band][index[right_ch]]))
        else:
            out.append(0.0)
            flags.append(f"sp.{band}_asy.{region}:missing_channels")
    return np.array(out), tuple(flags)


def descriptors(v):
    """The 12 across-channel descriptors of one per-channel metric.

    Returns the values in catalog order and a flag tuple.
    """
    v = np.asarray(v, dtype=np.float64)
    n = v.size
    mean, sd, skew, kurt, flat = _moments(v)
    mean, sd, skew, kurt, flat = float(mean), float(sd), float(skew), float(kurt), bool(flat)
    q1, median, q3 = np.percentile(v, [25, 50, 75])
    a = np.abs(v)
    p = a / (a.sum() + EPS)
    nz = p[p > 0]
    entropy = float(-np.sum(nz * np.log(nz)))
    outlier = 0.0 if flat else float(np.mean(np.abs(v - mean) > CHANNEL_OUTLIER_SD * sd))
    flags = ()
    if n < 2:
        sd = skew = kurt = entropy = 0.0
        flags = ("ts:single_channel",)
    values = [mean, sd, float(v.min()), float(v.max()), float(median), float(q3 - q1),
              sd / (abs(mean) + EPS), skew, kurt, entropy, float(a.max()), outlier]
    return values, flags


def temporal_spectral_features(powers, ratios):
    """9 per-channel metrics x 12 descriptors = 108 values."""
    metrics = dict(powers)
    metrics.update(ratios)
    out, flags = [], set()
    for m in CHANNEL_METRICS:
        vals, f = descriptors(metrics[m])
        out += vals
        flags.update(f)
    assert len(out) == len(CHANNEL_METRICS) * len(DESCRIPTORS)
    return np.array(out), tuple(sorted(flags))


def window_features(window, channel_names, sampling_rate):
    window = np.atleast_2d(np.asarray(window, dtype=np.float64))
    powers, ratios = channel_band_powers(window, sampling_rate)
    t = temporal_features(window)
    sp, f_sp = spectral_features(window, channel_names, sampling_rate, powers, ratios)
    ts, f_ts = temporal_spectral_features(powers, ratios)
    values = np.concatenate([t, sp, ts])
    if not np.all(np.isfinite(values)):
        raise FloatingPointError("non-finite feature value")
    return FeatureVector(values, f_sp + f_ts)


def extract(epoch, window_s=WINDOW_S, overlap=WINDOW_OVERLAP):
    """One FeatureVector per planned window, as ``(window_id, vector)`` pairs."""
    return [(i, window_features(epoch.data[:, sl], epoch.channel_names, epoch.sampling_rate_hz))
            for i, sl in enumerate(plan_windows(epoch, window_s, overlap))]
