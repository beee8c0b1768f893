"""YAML configuration overriding presets, model grids, evaluation and synth settings.

Example
-------
.. code-block:: yaml

    presets:
      frontal: [F3, Fz, F4]
    grids:
      logreg: {C: [0.1, 1], penalty: [l2]}
    evaluation:
      group_by_epoch: true
    analysis:
      optimal_task_score: max_cv_max
    synth:
      n_participants: 4
"""

import os
from dataclasses import dataclass, field

import yaml

from .models import FAMILIES, ModelSpec
from .synth import SynthConfig

SECTIONS = ("presets", "grids", "evaluation", "analysis", "synth", "line_freq_hz")
OPTIMAL_TASK_SCORES = ("max_cv_max", "mean_cv_max", "max_mean_accuracy")


class ConfigError(ValueError):
    """Invalid or unreadable configuration file."""


@dataclass
class Config:
    presets: dict = field(default_factory=dict)
    grids: dict = field(default_factory=dict)
    group_by_epoch: bool = True
    optimal_task_score: str = "max_cv_max"
    synth: dict = field(default_factory=dict)
    line_freq_hz: float = 50.0

    def model_spec(self, family, seed=0):
        return ModelSpec(family, self.grids.get(family), seed)

    def synth_config(self, seed=None):
        d = dict(self.synth)
        if seed is not None:
            d["seed"] = seed
        try:
            return SynthConfig.from_dict(d)
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(f"synth: {exc}") from None


def load_config(path=None):
    """Parse and validate ``path``; ``None`` gives the defaults."""
    if path is None:
        return Config()
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    raw = raw or {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    unknown = set(raw) - set(SECTIONS)
    if unknown:
        raise ConfigError(f"{path}: unknown sections {sorted(unknown)}; allowed {list(SECTIONS)}")
    cfg = Config()

    presets = raw.get("presets") or {}
    if not isinstance(presets, dict) or not all(isinstance(v, list) and v for v in presets.values()):
        raise ConfigError(f"{path}: presets must map names to non-empty label lists")
    cfg.presets = {str(k): [str(c) for c in v] for k, v in presets.items()}

    grids = raw.get("grids") or {}
    if not isinstance(grids, dict):
        raise ConfigError(f"{path}: grids must be a mapping")
    for family, grid in grids.items():
        if family not in FAMILIES:
            raise ConfigError(f"{path}: grids: unknown model family {family!r}")
        try:
            ModelSpec(family, grid)
        except (TypeError, ValueError, AttributeError) as exc:
            raise ConfigError(f"{path}: grids.{family}: {exc}") from None
    cfg.grids = dict(grids)

    ev = raw.get("evaluation") or {}
    if not isinstance(ev, dict) or set(ev) - {"group_by_epoch"}:
        raise ConfigError(f"{path}: evaluation accepts only 'group_by_epoch'")
    cfg.group_by_epoch = bool(ev.get("group_by_epoch", True))

    an = raw.get("analysis") or {}
    if not isinstance(an, dict) or set(an) - {"optimal_task_score"}:
        raise ConfigError(f"{path}: analysis accepts only 'optimal_task_score'")
    cfg.optimal_task_score = an.get("optimal_task_score", cfg.optimal_task_score)
    if cfg.optimal_task_score not in OPTIMAL_TASK_SCORES:
        raise ConfigError(f"{path}: analysis.optimal_task_score must be one of {OPTIMAL_TASK_SCORES}")

    synth = raw.get("synth") or {}
    if not isinstance(synth, dict):
        raise ConfigError(f"{path}: synth must be a mapping")
    cfg.synth = dict(synth)
    cfg.synth_config()  # validate eagerly

    if "line_freq_hz" in raw:
        try:
            cfg.line_freq_hz = float(raw["line_freq_hz"])
        except (TypeError, ValueError):
            raise ConfigError(f"{path}: line_freq_hz must be a number") from None
        if cfg.line_freq_hz <= 0:
            raise ConfigError(f"{path}: line_freq_hz must be positive")
    return cfg
