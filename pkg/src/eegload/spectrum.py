"""Welch power spectral density, band power, asymmetry and band ratios."""

from dataclasses import dataclass

import numpy as np

from .catalog import SPECTRAL_RATIOS
from .preprocessing import BANDS

EPS = 1e-12


@dataclass(frozen=True)
class Psd:
    freqs_hz: np.ndarray
    power: np.ndarray  # (..., n_freqs), one-sided density, uV^2/Hz


def hann(n):
    """Periodic Hann taper."""
    k = np.arange(n)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * k / n)


def welch_psd(x, sampling_rate, segment_s=2.0, overlap=0.5, taper="hann"):
    """Welch estimate averaged over tapered, mean-detrended segments.

    Parameters
    ----------
    x : ndarray, shape (..., n_times)
    sampling_rate : float
    segment_s : float
        Segment length; shrinks to the signal length for shorter inputs.
    overlap : float
        Fraction of a segment shared by consecutive segments.

    Returns
    -------
    Psd
        One-sided density normalised by the taper power, so that the
        integral over [0, Nyquist] equals the signal variance.
    """
    if taper != "hann":
        raise ValueError(f"unsupported taper {taper!r}")
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[-1]
    if n == 0:
        raise ValueError("empty signal")
    nperseg = min(int(round(segment_s * sampling_rate)), n)
    step = max(1, int(round(nperseg * (1.0 - overlap))))
    starts = range(0, n - nperseg + 1, step)
    w = hann(nperseg)
    scale = 1.0 / (sampling_rate * np.sum(w * w))
    acc = 0.0
    for s in starts:
        seg = x[..., s:s + nperseg]
        seg = seg - seg.mean(axis=-1, keepdims=True)
        spec = np.fft.rfft(seg * w, axis=-1)
        acc = acc + (spec.real ** 2 + spec.imag ** 2)
    power = acc * (scale / len(starts))
    if nperseg % 2 == 0:
        power[..., 1:-1] *= 2.0
    else:
        power[..., 1:] *= 2.0
    freqs = np.fft.rfftfreq(nperseg, d=1.0 / sampling_rate)
    return Psd(freqs, power)


def integrate(psd, lo_hz, hi_hz):
    """Trapezoidal integral of the density over [lo_hz, hi_hz].

    The band edges are interpolated onto the grid so that contiguous bands
    add up to the integral over their union.
    """
    f = psd.freqs_hz
    if lo_hz < f[0] or hi_hz > f[-1] or lo_hz >= hi_hz:
        raise ValueError(f"band [{lo_hz}, {hi_hz}] outside frequency grid [{f[0]}, {f[-1]}]")
    inner = (f > lo_hz) & (f < hi_hz)
    p = psd.power
    idx = np.searchsorted(f, [lo_hz, hi_hz])
    edge_vals = []
    for edge, i in zip((lo_hz, hi_hz), idx):
        if i < len(f) and f[i] == edge:
            edge_vals.append(p[..., i])
        else:
            t = (edge - f[i - 1]) / (f[i] - f[i - 1])
            edge_vals.append(p[..., i - 1] * (1.0 - t) + p[..., i] * t)
    xs = np.concatenate([[lo_hz], f[inner], [hi_hz]])
    ys = np.concatenate([edge_vals[0][..., None], p[..., inner], edge_vals[1][..., None]], axis=-1)
    return np.trapezoid(ys, xs, axis=-1)


def band_power(psd, band):
    """Integrated power in ``band`` (a name or a BandDefinition), per channel."""
    b = BANDS[band] if isinstance(band, str) else band
    return integrate(psd, b.lo_hz, b.hi_hz)


def band_powers(psd):
    return {name: band_power(psd, name) for name in BANDS}


def asymmetry(p_left, p_right, eps=EPS):
    """ln(P_right + eps) - ln(P_left + eps)."""
    p_left = np.asarray(p_left, dtype=np.float64)
    p_right = np.asarray(p_right, dtype=np.float64)
    if np.any(p_left < 0) or np.any(p_right < 0):
        raise ValueError("band power must be non-negative")
    out = np.log(p_right + eps) - np.log(p_left + eps)
    return float(out) if out.ndim == 0 else out


def band_ratios(powers, eps=EPS):
    """The six within-channel ratios; denominators are stabilised by ``eps``."""
    out = {}
    for name, num, den in SPECTRAL_RATIOS:
        n = sum(np.asarray(powers[b], dtype=np.float64) for b in num)
        d = sum(np.asarray(powers[b], dtype=np.float64) for b in den)
        out[name] = n / (d + eps)
    return out
