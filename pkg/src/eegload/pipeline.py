"""Dataset-level feature extraction: manifest in, feature-table rows out."""

import logging

from . import features
from .io import load_events, load_recording
from .preprocessing import ChannelPreset, preprocess_recording, select_channels

logger = logging.getLogger(__name__)


def extract_participant(manifest, entry, preset_name, overrides=None, line_freq=50.0):
    """Feature rows and skip records for one participant.

    Epoch ids run from 0 across the participant's recordings in manifest
    order. Re-referencing uses the full montage before the preset is applied.
    """
    rows, skipped = [], []
    epoch_id = 0
    for ref in entry.recordings:
        rec = load_recording(manifest.resolve(ref.path))
        preset = ChannelPreset.named(preset_name, rec.channel_names, overrides)
        missing = [ch for ch in preset.channels if ch not in rec.channel_names]
        if missing:
            raise KeyError(f"{entry.id}: preset {preset_name!r} channels missing from montage: "
                           f"{', '.join(missing)}")
        events = load_events(manifest.resolve(ref.condition_labels_path), rec.sample_count)
        skips = []
        epochs = preprocess_recording(rec, events, line_freq=line_freq, skipped=skips)
        skipped.extend({"participant": entry.id, "recording": ref.path, **s} for s in skips)
        for ep in epochs:
            ep = select_channels(ep, preset)
            for window_id, vec in features.extract(ep):
                rows.append((entry.id, epoch_id, window_id, ep.condition, vec))
            epoch_id += 1
    return rows, skipped


def extract_dataset(manifest, preset_name="all", overrides=None, jobs=1, line_freq=50.0):
    """Rows for every participant, in manifest order, independent of ``jobs``."""
    args = [(manifest, p, preset_name, overrides, line_freq) for p in manifest.participants]
    if jobs == 1:
        parts = [extract_participant(*a) for a in args]
    else:
        from joblib import Parallel, delayed
        parts = Parallel(n_jobs=jobs)(delayed(extract_participant)(*a) for a in args)
    rows, skipped = [], []
    for r, s in parts:
        rows.extend(r)
        skipped.extend(s)
    return rows, skipped
