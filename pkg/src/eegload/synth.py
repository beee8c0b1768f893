"""Seeded synthetic EEG with planted condition-dependent band-power effects.

Each participant gets one continuous recording per landmark condition
(counterbalanced order). A recording is a chain of fixed-length segments,
one per map event. Every segment carries 1/f background noise plus one
sinusoid per channel and band whose amplitude, frequency and phase are
redrawn per segment. Amplitudes jitter per channel and, through a shared
"state" factor, per band across all channels. Effects multiply the
amplitude of one band in one region for one condition.
"""

import logging
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from .io import (CONDITIONS, DatasetManifest, Event, ParticipantEntry, ParticipantProfile,
                 Recording, RecordingRef, dump_json, write_events, write_manifest, write_recording)
from .montage import FRONTAL, MONTAGE_64, PARIETAL
from .preprocessing import BANDS, EPOCH_TMAX, EPOCH_TMIN

logger = logging.getLogger(__name__)

REGIONS = {"frontal": FRONTAL, "parietal": PARIETAL, "all": MONTAGE_64}

# median sinusoid amplitude per band (uV)
DEFAULT_BAND_AMPLITUDES = {"delta": 4.0, "theta": 3.0, "alpha": 5.0, "beta": 2.0, "gamma": 1.0}

DEFAULT_PROFILE_RANGES = {
    "age": [19, 35],
    "sbsod": [2.0, 6.5],
    "ptsot_error": [8.0, 60.0],
    "corsi": [4.0, 8.0],
    "female_share": 0.5,
}


@dataclass(frozen=True)
class Effect:
    condition: str
    band: str
    region: tuple
    multiplier: float

    @classmethod
    def from_dict(cls, d):
        region = d["region"]
        if isinstance(region, str):
            if region not in REGIONS:
                raise ValueError(f"unknown region {region!r}; use one of {sorted(REGIONS)} or a label list")
            region = REGIONS[region]
        return cls(str(d["condition"]), str(d["band"]), tuple(region), float(d["multiplier"]))


def default_effects():
    return [Effect(c, "theta", FRONTAL, m) for c, m in (("L3", 1.0), ("L5", 1.3), ("L7", 1.8))]


@dataclass
class SynthConfig:
    n_participants: int = 10
    epochs_per_condition: int = 20
    sampling_rate_hz: float = 500.0
    montage: tuple = MONTAGE_64
    background_exponent: float = 1.0
    background_uv: float = 6.0
    band_amplitudes: dict = field(default_factory=lambda: dict(DEFAULT_BAND_AMPLITUDES))
    effects: list = field(default_factory=default_effects)
    inter_participant_variability: float = 0.15
    epoch_jitter: float = 0.2
    state_jitter: float = 0.2
    participant_amplitude_sd: float = 0.2
    channel_gain_sd: float = 0.1
    line_noise_uv: float = 0.0
    line_freq_hz: float = 50.0
    segment_s: float = 7.0
    event_offset_s: float = 1.25
    taper_s: float = 0.25
    profile_ranges: dict = field(default_factory=lambda: dict(DEFAULT_PROFILE_RANGES))
    seed: int = 0

    def __post_init__(self):
        self.montage = tuple(self.montage)
        self.effects = [e if isinstance(e, Effect) else Effect.from_dict(e) for e in self.effects]
        self.validate()

    def validate(self):
        if self.n_participants < 1 or self.epochs_per_condition < 1:
            raise ValueError("n_participants and epochs_per_condition must be at least 1")
        if not self.sampling_rate_hz > 2 * max(b.hi_hz for b in BANDS.values()):
            raise ValueError("sampling rate too low for the band definitions")
        if len(set(self.montage)) != len(self.montage):
            raise ValueError("duplicate montage labels")
        for band in self.band_amplitudes:
            if band not in BANDS:
                raise ValueError(f"unknown band {band!r}")
        for e in self.effects:
            if e.condition not in CONDITIONS:
                raise ValueError(f"effect condition {e.condition!r} not in {CONDITIONS}")
            if e.band not in BANDS:
                raise ValueError(f"effect band {e.band!r} not in {tuple(BANDS)}")
            if not e.multiplier > 0:
                raise ValueError(f"effect multiplier must be positive, got {e.multiplier}")
            missing = set(e.region) - set(self.montage)
            if missing:
                raise ValueError(f"effect region labels not in montage: {sorted(missing)}")
        if self.event_offset_s + EPOCH_TMIN < self.taper_s or \
                self.event_offset_s + EPOCH_TMAX > self.segment_s - self.taper_s:
            raise ValueError("segment too short for the epoch window plus tapers")
        for name in ("background_uv", "inter_participant_variability", "epoch_jitter",
                     "participant_amplitude_sd", "channel_gain_sd", "line_noise_uv", "state_jitter"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @classmethod
    def from_dict(cls, d):
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown synth config keys: {sorted(unknown)}")
        d = dict(d)
        if "band_amplitudes" in d:
            d["band_amplitudes"] = {**DEFAULT_BAND_AMPLITUDES, **d["band_amplitudes"]}
        if "profile_ranges" in d:
            d["profile_ranges"] = {**DEFAULT_PROFILE_RANGES, **d["profile_ranges"]}
        return cls(**d)

    def to_dict(self):
        d = asdict(self)
        d["montage"] = list(self.montage)
        d["effects"] = [{"condition": e.condition, "band": e.band, "region": list(e.region),
                         "multiplier": e.multiplier} for e in self.effects]
        return d


def pink_noise(rng, n_channels, n_samples, exponent, fs):
    """Unit-variance noise with power spectrum proportional to 1/f**exponent."""
    spec = rng.standard_normal((n_channels, n_samples // 2 + 1)) \
        + 1j * rng.standard_normal((n_channels, n_samples // 2 + 1))
    f = np.fft.rfftfreq(n_samples, 1.0 / fs)
    shape = np.zeros_like(f)
    shape[1:] = f[1:] ** (-exponent / 2.0)
    x = np.fft.irfft(spec * shape, n=n_samples)
    sd = x.std(axis=1, keepdims=True)
    return x / np.where(sd > 0, sd, 1.0)


def _taper(n, n_edge):
    w = np.ones(n)
    if n_edge > 0:
        ramp = 0.5 - 0.5 * np.cos(np.pi * (np.arange(n_edge) + 0.5) / n_edge)
        w[:n_edge] = ramp
        w[-n_edge:] = ramp[::-1]
    return w


def _multiplier_table(config, participant_scale):
    """(condition, band) -> per-channel amplitude multipliers."""
    idx = {c: i for i, c in enumerate(config.montage)}
    table = {}
    for e in config.effects:
        m = table.setdefault((e.condition, e.band), np.ones(len(config.montage)))
        rows = [idx[c] for c in e.region]
        m[rows] *= e.multiplier ** participant_scale
    return table


def draw_profile(rng, ranges):
    lo, hi = ranges["age"]
    return ParticipantProfile(
        age=int(rng.integers(int(lo), int(hi) + 1)),
        gender="female" if rng.random() < ranges["female_share"] else "male",
        sbsod=round(float(rng.uniform(*ranges["sbsod"])), 3),
        ptsot_error=round(float(rng.uniform(*ranges["ptsot_error"])), 3),
        corsi=round(float(rng.uniform(*ranges["corsi"])), 3),
    )


def simulate_participant(config, index, seed_seq):
    """Return (profile, [(condition, Recording, events)]) for participant ``index``."""
    rng = np.random.default_rng(seed_seq)
    fs = config.sampling_rate_hz
    n_ch = len(config.montage)
    bands = [b for b in BANDS if config.band_amplitudes.get(b, 0.0) > 0]
    profile = draw_profile(rng, config.profile_ranges)
    band_amp = {b: config.band_amplitudes[b] * np.exp(config.participant_amplitude_sd * rng.standard_normal())
                for b in bands}
    gain = np.exp(config.channel_gain_sd * rng.standard_normal(n_ch))
    scale = float(np.exp(config.inter_participant_variability * rng.standard_normal()))
    mult = _multiplier_table(config, scale)

    seg_n = int(round(config.segment_s * fs))
    offset_n = int(round(config.event_offset_s * fs))
    taper = _taper(seg_n, int(round(config.taper_s * fs)))
    t = np.arange(seg_n) / fs
    order = [CONDITIONS[(index + k) % len(CONDITIONS)] for k in range(len(CONDITIONS))]
    runs = []
    for cond in order:
        n_total = seg_n * config.epochs_per_condition
        data = config.background_uv * pink_noise(rng, n_ch, n_total, config.background_exponent, fs)
        events = []
        for e in range(config.epochs_per_condition):
            seg = np.zeros((n_ch, seg_n))
            state = np.exp(config.state_jitter * rng.standard_normal(len(bands)))
            for bi, b in enumerate(bands):
                lo, hi = BANDS[b].lo_hz, BANDS[b].hi_hz
                margin = min(0.5, (hi - lo) / 4)
                freq = rng.uniform(lo + margin, hi - margin, n_ch)
                phase = rng.uniform(0, 2 * np.pi, n_ch)
                amp = band_amp[b] * gain * np.exp(config.epoch_jitter * rng.standard_normal(n_ch))
                amp = amp * state[bi] * mult.get((cond, b), 1.0)
                seg += amp[:, None] * np.sin(2 * np.pi * freq[:, None] * t[None, :] + phase[:, None])
            data[:, e * seg_n:(e + 1) * seg_n] += seg * taper
            events.append(Event(e * seg_n + offset_n, "showMap", cond))
        if config.line_noise_uv > 0:
            tt = np.arange(n_total) / fs
            data += config.line_noise_uv * np.sin(2 * np.pi * config.line_freq_hz * tt + rng.uniform(0, 2 * np.pi))
        runs.append((cond, Recording(fs, config.montage, data.astype(np.float32)), events))
    return profile, runs


def participant_ids(n):
    width = max(2, len(str(n)))
    return [f"P{i + 1:0{width}d}" for i in range(n)]


def _generate_one(config, index, seed_seq, out_dir, pid):
    profile, runs = simulate_participant(config, index, seed_seq)
    pdir = os.path.join(out_dir, pid)
    os.makedirs(pdir, exist_ok=True)
    refs = []
    for k, (_, rec, events) in enumerate(runs, start=1):
        stem = f"run{k}"
        write_recording(rec, os.path.join(pdir, stem + ".json"))
        write_events(events, os.path.join(pdir, stem + "_events.csv"))
        refs.append(RecordingRef(f"{pid}/{stem}.json", f"{pid}/{stem}_events.csv"))
    return ParticipantEntry(pid, profile, tuple(refs))


def generate(config, out_dir, jobs=1):
    """Write a complete dataset (manifest, recordings, events, profiles) to ``out_dir``.

    Participants are simulated from independent child seeds of
    ``config.seed``, so the output does not depend on ``jobs``.
    """
    os.makedirs(out_dir, exist_ok=True)
    seeds = np.random.SeedSequence(config.seed).spawn(config.n_participants)
    pids = participant_ids(config.n_participants)
    if jobs == 1:
        entries = [_generate_one(config, i, s, out_dir, p) for i, (s, p) in enumerate(zip(seeds, pids))]
    else:
        from joblib import Parallel, delayed
        entries = Parallel(n_jobs=jobs)(delayed(_generate_one)(config, i, s, out_dir, p)
                                        for i, (s, p) in enumerate(zip(seeds, pids)))
    manifest = DatasetManifest(list(entries), root=out_dir)
    write_manifest(manifest, os.path.join(out_dir, "manifest.json"))
    dump_json(config.to_dict(), os.path.join(out_dir, "synth_config.json"))
    logger.info("wrote %d participants to %s", len(entries), out_dir)
    return manifest
