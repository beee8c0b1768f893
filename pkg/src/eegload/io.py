"""On-disk formats: dataset manifest, recordings, events and feature tables.

Recordings are stored as a JSON header next to a raw little-endian float32
channel-major sidecar (``.f32``). Small fixtures may instead use a CSV file
whose first line is ``# sampling_rate_hz=<fs>`` followed by a row of channel
names and one row per sample.
"""

import csv
import json
import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from .catalog import FEATURE_NAMES, N_FEATURES

CONDITIONS = ("L3", "L5", "L7")
LANDMARKS = {"L3": 3, "L5": 5, "L7": 7}
KEY_COLUMNS = ("participant", "epoch_id", "window_id", "condition")
RECORDING_FORMAT = "eegload-recording/1"


class FormatError(ValueError):
    """Malformed or inconsistent file content."""


class MissingFileError(FormatError, FileNotFoundError):
    """A file referenced by a manifest does not exist."""


@dataclass(frozen=True)
class ParticipantProfile:
    age: int
    gender: str
    sbsod: float
    ptsot_error: float
    corsi: float

    def __post_init__(self):
        if self.gender not in ("female", "male"):
            raise FormatError(f"gender: expected 'female' or 'male', got {self.gender!r}")
        if not 1.0 <= self.sbsod <= 7.0:
            raise FormatError(f"sbsod: {self.sbsod} outside [1, 7]")
        if not 0.0 <= self.ptsot_error <= 180.0:
            raise FormatError(f"ptsot_error: {self.ptsot_error} outside [0, 180]")
        if not 0.0 < self.corsi < 10.0:
            raise FormatError(f"corsi: {self.corsi} outside (0, 10)")

    @classmethod
    def from_dict(cls, d):
        missing = [k for k in ("age", "gender", "sbsod", "ptsot_error", "corsi") if k not in d]
        if missing:
            raise FormatError(f"missing profile fields: {', '.join(missing)}")
        age = d["age"]
        if isinstance(age, bool) or not float(age).is_integer():
            raise FormatError(f"age: expected integer years, got {age!r}")
        return cls(int(age), str(d["gender"]), float(d["sbsod"]),
                   float(d["ptsot_error"]), float(d["corsi"]))


@dataclass(frozen=True)
class RecordingRef:
    path: str
    condition_labels_path: str


@dataclass(frozen=True)
class ParticipantEntry:
    id: str
    metadata: ParticipantProfile
    recordings: tuple


@dataclass
class DatasetManifest:
    participants: list = field(default_factory=list)
    root: str = "."

    @property
    def n_recordings(self):
        return sum(len(p.recordings) for p in self.participants)

    def resolve(self, path):
        return path if os.path.isabs(path) else os.path.join(self.root, path)

    def participant(self, pid):
        for p in self.participants:
            if p.id == pid:
                return p
        raise KeyError(pid)


def _recording_data_path(header_path):
    with open(header_path) as fh:
        header = json.load(fh)
    return os.path.join(os.path.dirname(header_path), header.get("data_file", ""))


def load_manifest(path):
    """Parse and validate a dataset manifest (JSON).

    Every referenced recording and events file must exist; participant ids
    must be unique.
    """
    if not os.path.exists(path):
        raise MissingFileError(f"missing file: {path}")
    with open(path) as fh:
        text = fh.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict) or not isinstance(raw.get("participants"), list):
        raise FormatError(f"{path}: top level must be an object with a 'participants' list")

    manifest = DatasetManifest(root=os.path.dirname(os.path.abspath(path)))
    seen = set()
    for i, entry in enumerate(raw["participants"]):
        where = f"{path}: participants[{i}]"
        try:
            pid = str(entry["id"])
            profile = ParticipantProfile.from_dict(entry.get("metadata", {}))
            recs = entry.get("recordings", [])
        except FormatError as exc:
            raise FormatError(f"{where}.metadata: {exc}") from None
        except (KeyError, TypeError) as exc:
            raise FormatError(f"{where}: missing field {exc}") from None
        if pid in seen:
            raise FormatError(f"{where}: duplicate participant id {pid!r}")
        seen.add(pid)
        refs = []
        for j, rec in enumerate(recs):
            try:
                ref = RecordingRef(str(rec["path"]), str(rec["condition_labels_path"]))
            except (KeyError, TypeError) as exc:
                raise FormatError(f"{where}.recordings[{j}]: missing field {exc}") from None
            for p in (ref.path, ref.condition_labels_path):
                full = manifest.resolve(p)
                if not os.path.exists(full):
                    raise MissingFileError(f"{where}.recordings[{j}]: missing file {full}")
            full = manifest.resolve(ref.path)
            if full.endswith(".json") and not os.path.exists(_recording_data_path(full)):
                raise MissingFileError(f"{where}.recordings[{j}]: missing file {_recording_data_path(full)}")
            refs.append(ref)
        manifest.participants.append(ParticipantEntry(pid, profile, tuple(refs)))
    return manifest


def write_manifest(manifest, path):
    doc = {"participants": [
        {"id": p.id, "metadata": asdict(p.metadata),
         "recordings": [asdict(r) for r in p.recordings]}
        for p in manifest.participants
    ]}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass
class Recording:
    sampling_rate_hz: float
    channel_names: tuple
    data: np.ndarray  # (n_channels, n_samples), microvolts

    def __post_init__(self):
        self.channel_names = tuple(self.channel_names)
        if not self.sampling_rate_hz > 0:
            raise FormatError(f"sampling rate must be positive, got {self.sampling_rate_hz}")
        if len(set(self.channel_names)) != len(self.channel_names):
            raise FormatError("duplicate channel names")
        if self.data.ndim != 2 or self.data.shape[0] != len(self.channel_names):
            raise FormatError(f"data shape {self.data.shape} does not match "
                              f"{len(self.channel_names)} channels")

    @property
    def sample_count(self):
        return self.data.shape[1]


def write_recording(rec, path):
    """Write ``rec``; ``path`` ending in ``.csv`` selects the text format."""
    if path.endswith(".csv"):
        with open(path, "w", newline="") as fh:
            fh.write(f"# sampling_rate_hz={rec.sampling_rate_hz!r}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(rec.channel_names)
            for row in np.asarray(rec.data, dtype=np.float64).T:
                w.writerow([repr(float(v)) for v in row])
        return
    stem = os.path.splitext(path)[0]
    data_file = os.path.basename(stem) + ".f32"
    header = {
        "format": RECORDING_FORMAT,
        "sampling_rate_hz": float(rec.sampling_rate_hz),
        "channel_names": list(rec.channel_names),
        "sample_count": int(rec.sample_count),
        "data_file": data_file,
        "dtype": "<f4",
        "layout": "channel-major",
        "units": "uV",
    }
    np.ascontiguousarray(rec.data, dtype="<f4").tofile(stem + ".f32")
    with open(stem + ".json", "w") as fh:
        json.dump(header, fh, indent=2)
        fh.write("\n")


def load_recording(path):
    if path.endswith(".csv"):
        return _load_recording_csv(path)
    with open(path) as fh:
        try:
            header = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    for key in ("sampling_rate_hz", "channel_names", "sample_count", "data_file"):
        if key not in header:
            raise FormatError(f"{path}: missing header field {key!r}")
    fs = float(header["sampling_rate_hz"])
    if not fs > 0:
        raise FormatError(f"{path}: sampling rate must be positive, got {fs}")
    names = list(header["channel_names"])
    n = int(header["sample_count"])
    if n < 0:
        raise FormatError(f"{path}: negative sample_count")
    data_path = os.path.join(os.path.dirname(path), header["data_file"])
    if not os.path.exists(data_path):
        raise MissingFileError(f"missing file: {data_path}")
    flat = np.fromfile(data_path, dtype="<f4")
    if flat.size != len(names) * n:
        raise FormatError(f"{data_path}: truncated data: expected {len(names) * n} "
                          f"values, found {flat.size}")
    return Recording(fs, names, flat.reshape(len(names), n))


def _load_recording_csv(path):
    with open(path, newline="") as fh:
        first = fh.readline().strip()
        if not first.startswith("# sampling_rate_hz="):
            raise FormatError(f"{path}: line 1: expected '# sampling_rate_hz=<value>'")
        fs = float(first.split("=", 1)[1])
        reader = csv.reader(fh)
        names = next(reader)
        rows = []
        for lineno, row in enumerate(reader, start=3):
            if len(row) != len(names):
                raise FormatError(f"{path}: line {lineno}: truncated row")
            rows.append([float(v) for v in row])
    data = np.array(rows, dtype=np.float64).reshape(-1, len(names)).T
    return Recording(fs, names, data)


@dataclass(frozen=True)
class Event:
    sample_index: int
    label: str
    condition: str


def write_events(events, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sample_index", "label", "condition"])
        for ev in events:
            w.writerow([ev.sample_index, ev.label, ev.condition])


def load_events(path, sample_count=None):
    events = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for lineno, row in enumerate(reader, start=2):
            try:
                idx = int(row["sample_index"])
                ev = Event(idx, row["label"], row["condition"])
            except (KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"{path}: line {lineno}: {exc}") from None
            if idx < 0 or (sample_count is not None and idx >= sample_count):
                raise FormatError(f"{path}: line {lineno}: sample_index {idx} out of range")
            if ev.condition not in LANDMARKS:
                raise FormatError(f"{path}: line {lineno}: unknown condition {ev.condition!r}")
            events.append(ev)
    return events


@dataclass
class FeatureTable:
    participant: np.ndarray
    epoch_id: np.ndarray
    window_id: np.ndarray
    condition: np.ndarray
    X: np.ndarray

    def __len__(self):
        return len(self.participant)

    def subset(self, mask):
        return FeatureTable(self.participant[mask], self.epoch_id[mask],
                            self.window_id[mask], self.condition[mask], self.X[mask])


def write_feature_table(rows, path):
    """Write ``(participant, epoch_id, window_id, condition, vector)`` rows.

    The header is the 4 key columns followed by the 143 catalog names.
    """
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(KEY_COLUMNS + FEATURE_NAMES)
        for participant, epoch_id, window_id, condition, vec in rows:
            values = np.asarray(getattr(vec, "values", vec), dtype=np.float64)
            if values.shape != (N_FEATURES,):
                raise FormatError(f"feature vector length {values.size}, expected {N_FEATURES}")
            w.writerow([participant, int(epoch_id), int(window_id), condition]
                       + [repr(float(v)) for v in values])


def read_feature_table(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        if tuple(header) != KEY_COLUMNS + FEATURE_NAMES:
            raise FormatError(f"{path}: header does not match the feature catalog")
        keys, values = [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise FormatError(f"{path}: line {lineno}: expected {len(header)} columns, got {len(row)}")
            keys.append(row[:4])
            values.append([float(v) for v in row[4:]])
    if keys:
        k = np.array(keys, dtype=object)
        participant = k[:, 0].astype(str)
        epoch_id = k[:, 1].astype(int)
        window_id = k[:, 2].astype(int)
        condition = k[:, 3].astype(str)
    else:
        participant = np.array([], dtype=str)
        epoch_id = np.array([], dtype=int)
        window_id = np.array([], dtype=int)
        condition = np.array([], dtype=str)
    X = np.array(values, dtype=np.float64).reshape(-1, N_FEATURES)
    if not np.all(np.isfinite(X)):
        bad = int(np.argwhere(~np.isfinite(X))[0, 0]) + 2
        raise FormatError(f"{path}: line {bad}: non-finite feature value")
    return FeatureTable(participant, epoch_id, window_id, condition, X)


def dump_json(obj, path):
    """Deterministic JSON: sorted keys, shortest round-trip floats."""
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def load_profiles(path):
    """Participant id -> ParticipantProfile from a manifest.

    Only metadata is validated; recording files need not be present.
    """
    if not os.path.exists(path):
        raise MissingFileError(f"missing file: {path}")
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict) or not isinstance(raw.get("participants"), list):
        raise FormatError(f"{path}: top level must be an object with a 'participants' list")
    profiles = {}
    for i, entry in enumerate(raw["participants"]):
        try:
            pid = str(entry["id"])
            profiles[pid] = ParticipantProfile.from_dict(entry.get("metadata", {}))
        except FormatError as exc:
            raise FormatError(f"{path}: participants[{i}].metadata: {exc}") from None
        except (KeyError, TypeError) as exc:
            raise FormatError(f"{path}: participants[{i}]: missing field {exc}") from None
    return profiles
