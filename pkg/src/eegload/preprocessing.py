"""Filtering, re-referencing, epoching, baseline correction, channel presets.

Filters are applied forward-backward (zero phase) to the continuous
recording before epoching.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy import signal

from .io import Recording
from .montage import resolve_preset

logger = logging.getLogger(__name__)

EPOCH_TMIN = -1.0
EPOCH_TMAX = 5.0


@dataclass(frozen=True)
class BandDefinition:
    name: str
    lo_hz: float
    hi_hz: float


BAND_DEFS = (
    BandDefinition("delta", 0.5, 4.0),
    BandDefinition("theta", 4.0, 8.0),
    BandDefinition("alpha", 8.0, 13.0),
    BandDefinition("beta", 13.0, 30.0),
    BandDefinition("gamma", 30.0, 45.0),
)
BANDS = {b.name: b for b in BAND_DEFS}


@dataclass(frozen=True)
class ChannelPreset:
    name: str
    channels: tuple

    @classmethod
    def named(cls, name, montage, overrides=None):
        return cls(name, resolve_preset(name, montage, overrides))


@dataclass(frozen=True)
class Epoch:
    data: np.ndarray  # (n_channels, n_samples)
    sampling_rate_hz: float
    channel_names: tuple
    condition: str
    event_sample: int = 0
    t0_offset_s: float = EPOCH_TMIN

    @property
    def duration_s(self):
        return self.data.shape[1] / self.sampling_rate_hz

    def with_data(self, data, channel_names=None):
        return replace(self, data=data,
                       channel_names=self.channel_names if channel_names is None else tuple(channel_names))


def _with_data(rec, data):
    return Recording(rec.sampling_rate_hz, rec.channel_names, data)


def bandpass(recording, lo_hz=0.5, hi_hz=45.0, order=4):
    """Zero-phase Butterworth band-pass of a continuous recording."""
    fs = recording.sampling_rate_hz
    nyq = fs / 2.0
    if not 0 < lo_hz < hi_hz:
        raise ValueError(f"need 0 < lo < hi, got lo={lo_hz}, hi={hi_hz}")
    if hi_hz >= nyq:
        raise ValueError(f"high cutoff {hi_hz} Hz must be below Nyquist ({nyq} Hz)")
    sos = signal.butter(order, [lo_hz, hi_hz], btype="bandpass", fs=fs, output="sos")
    x = np.asarray(recording.data, dtype=np.float64)
    return _with_data(recording, signal.sosfiltfilt(sos, x, axis=-1))


def notch(recording, f0_hz=50.0, harmonics=True, quality=30.0):
    """Zero-phase IIR notch at ``f0_hz`` and, optionally, its harmonics below Nyquist."""
    fs = recording.sampling_rate_hz
    nyq = fs / 2.0
    if f0_hz >= nyq:
        raise ValueError(f"notch frequency {f0_hz} Hz must be below Nyquist ({nyq} Hz)")
    freqs = [f0_hz]
    if harmonics:
        k = 2
        while k * f0_hz < nyq:
            freqs.append(k * f0_hz)
            k += 1
    x = np.asarray(recording.data, dtype=np.float64)
    for f in freqs:
        b, a = signal.iirnotch(f, quality, fs=fs)
        x = signal.filtfilt(b, a, x, axis=-1)
    return _with_data(recording, x)


def average_reference(epoch):
    """Subtract the across-channel mean at every sample."""
    data = np.asarray(epoch.data, dtype=np.float64)
    if data.shape[0] < 2:
        raise ValueError("average reference needs at least 2 channels")
    out = data - data.mean(axis=0, keepdims=True)
    if isinstance(epoch, Recording):
        return _with_data(epoch, out)
    return epoch.with_data(out)


def epochize(recording, events, tmin=EPOCH_TMIN, tmax=EPOCH_TMAX, skipped=None):
    """Cut one epoch per event over ``[event + tmin, event + tmax)``.

    Events whose window does not fit inside the recording are dropped and
    logged; if ``skipped`` is a list, a record is appended to it for each.
    """
    fs = recording.sampling_rate_hz
    pre = int(round(-tmin * fs))
    post = int(round(tmax * fs))
    n = recording.sample_count
    data = np.asarray(recording.data, dtype=np.float64)
    epochs = []
    for ev in events:
        start, stop = ev.sample_index - pre, ev.sample_index + post
        if start < 0 or stop > n:
            record = {"sample_index": ev.sample_index, "condition": ev.condition,
                      "reason": f"epoch [{start}, {stop}) outside recording [0, {n})"}
            logger.warning("skipping event at sample %d: %s", ev.sample_index, record["reason"])
            if skipped is not None:
                skipped.append(record)
            continue
        epochs.append(Epoch(data[:, start:stop].copy(), fs, recording.channel_names,
                            ev.condition, ev.sample_index, tmin))
    return epochs


def baseline_correct(epoch):
    """Remove the per-channel mean of the pre-event segment."""
    n_base = int(round(-epoch.t0_offset_s * epoch.sampling_rate_hz))
    if n_base <= 0:
        raise ValueError("epoch has no baseline segment")
    data = np.asarray(epoch.data, dtype=np.float64)
    return epoch.with_data(data - data[:, :n_base].mean(axis=1, keepdims=True))


def select_channels(epoch, preset):
    """Keep the channels of ``preset`` (a ChannelPreset or label sequence), in preset order."""
    labels = tuple(preset.channels if isinstance(preset, ChannelPreset) else preset)
    index = {ch: i for i, ch in enumerate(epoch.channel_names)}
    missing = [ch for ch in labels if ch not in index]
    if missing:
        raise KeyError(f"channels not in montage: {', '.join(missing)}")
    rows = [index[ch] for ch in labels]
    data = np.asarray(epoch.data)[rows]
    if isinstance(epoch, Recording):
        return Recording(epoch.sampling_rate_hz, labels, data)
    return epoch.with_data(data, labels)


def preprocess_recording(recording, events, line_freq=50.0, skipped=None):
    """Continuous filtering, then epoching, average reference and baseline correction."""
    rec = notch(bandpass(recording), line_freq)
    return [baseline_correct(average_reference(ep))
            for ep in epochize(rec, events, skipped=skipped)]
