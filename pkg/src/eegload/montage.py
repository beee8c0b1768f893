"""Electrode montage, channel presets and hemisphere bookkeeping."""

import re

# Extended 10-20 layout of a 64-channel active-electrode cap (FCz restored
# after re-referencing).
MONTAGE_64 = (
    "Fp1", "Fp2", "AF7", "AF3", "AFz", "AF4", "AF8",
    "F7", "F5", "F3", "F1", "Fz", "F2", "F4", "F6", "F8",
    "FT9", "FT7", "FC5", "FC3", "FC1", "FCz", "FC2", "FC4", "FC6", "FT8", "FT10",
    "T7", "C5", "C3", "C1", "Cz", "C2", "C4", "C6", "T8",
    "TP9", "TP7", "CP5", "CP3", "CP1", "CPz", "CP2", "CP4", "CP6", "TP8", "TP10",
    "P7", "P5", "P3", "P1", "Pz", "P2", "P4", "P6", "P8",
    "PO7", "PO3", "POz", "PO4", "PO8",
    "O1", "Oz", "O2",
)

FRONTAL = (
    "Fp1", "Fp2", "AF7", "AF3", "AF4", "AF8",
    "F7", "F5", "F3", "F1", "Fz", "F2", "F4", "F6", "F8",
)
PARIETAL = ("P7", "P5", "P3", "P1", "Pz", "P2", "P4", "P6", "P8")

PRESET_NAMES = ("all", "frontal", "frontal_parietal")

# (feature suffix, band, right label, left label)
REGIONAL_PAIRS = (
    ("frontal", "alpha", "F4", "F3"),
    ("frontal", "theta", "F4", "F3"),
    ("frontotemporal", "alpha", "FT8", "FT7"),
    ("frontotemporal", "theta", "FT8", "FT7"),
    ("parietal", "alpha", "P4", "P3"),
    ("parietal", "theta", "P4", "P3"),
)

_DIGITS = re.compile(r"(\d+)$")


def default_presets(montage=MONTAGE_64):
    """Return the built-in preset table for ``montage``."""
    return {
        "all": tuple(montage),
        "frontal": FRONTAL,
        "frontal_parietal": FRONTAL + PARIETAL,
    }


def resolve_preset(name, montage, overrides=None):
    """Channel list for preset ``name``.

    ``overrides`` maps preset names to label lists and wins over the
    built-in table. ``all`` always means the full montage unless
    overridden.
    """
    table = default_presets(montage)
    if overrides:
        table.update({k: tuple(v) for k, v in overrides.items()})
    if name not in table:
        raise ValueError(f"unknown preset {name!r}; known: {sorted(table)}")
    channels = table[name]
    if not channels:
        raise ValueError(f"preset {name!r} is empty")
    return tuple(channels)


def hemisphere(label):
    """'left' for odd-numbered labels, 'right' for even, None for midline."""
    m = _DIGITS.search(label)
    if m is None:
        return None
    return "left" if int(m.group(1)) % 2 else "right"


def hemisphere_indices(channel_names):
    left = [i for i, ch in enumerate(channel_names) if hemisphere(ch) == "left"]
    right = [i for i, ch in enumerate(channel_names) if hemisphere(ch) == "right"]
    return left, right
