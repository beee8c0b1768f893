import json
import os

import numpy as np
import pytest

from eegload.io import load_events, load_manifest, load_recording
from eegload.montage import FRONTAL
from eegload.spectrum import band_power, welch_psd
from eegload.synth import Effect, SynthConfig, generate, pink_noise


def test_pink_noise_slope(rng):
    x = pink_noise(rng, 1, 2 ** 16, 1.0, 250.0)[0]
    psd = welch_psd(x, 250.0, segment_s=8.0)
    band = (psd.freqs_hz > 2) & (psd.freqs_hz < 60)
    slope = np.polyfit(np.log(psd.freqs_hz[band]), np.log(psd.power[band]), 1)[0]
    assert slope == pytest.approx(-1.0, abs=0.15)


def test_layout_and_counterbalancing(small_dataset):
    m = load_manifest(os.path.join(small_dataset, "manifest.json"))
    orders = []
    for p in m.participants:
        conds = []
        for ref in p.recordings:
            rec = load_recording(m.resolve(ref.path))
            ev = load_events(m.resolve(ref.condition_labels_path), rec.sample_count)
            assert len(ev) == 6 and len({e.condition for e in ev}) == 1
            assert {e.label for e in ev} == {"showMap"}
            conds.append(ev[0].condition)
        orders.append(tuple(conds))
        assert sorted(conds) == ["L3", "L5", "L7"]
    assert len(set(orders)) == 3
    cfg = json.load(open(os.path.join(small_dataset, "synth_config.json")))
    assert cfg["seed"] == 7


def test_planted_theta_effect_is_visible(tmp_path):
    cfg = SynthConfig(n_participants=1, epochs_per_condition=8, sampling_rate_hz=250.0, seed=5,
                      effects=[Effect("L7", "theta", tuple(FRONTAL), 3.0)], state_jitter=0.0)
    generate(cfg, str(tmp_path))
    m = load_manifest(str(tmp_path / "manifest.json"))
    theta = {}
    for ref in m.participants[0].recordings:
        rec = load_recording(m.resolve(ref.path))
        ev = load_events(m.resolve(ref.condition_labels_path))
        idx = [rec.channel_names.index(c) for c in FRONTAL]
        theta[ev[0].condition] = band_power(welch_psd(rec.data[idx], 250.0), "theta").mean()
    assert theta["L7"] > 2.0 * theta["L3"]


def test_same_seed_same_bytes(tmp_path):
    cfg = SynthConfig(n_participants=2, epochs_per_condition=2, sampling_rate_hz=250.0, seed=11)
    generate(cfg, str(tmp_path / "a"))
    generate(cfg, str(tmp_path / "b"), jobs=2)
    for root, _, files in os.walk(tmp_path / "a"):
        for f in files:
            other = os.path.join(str(root).replace(str(tmp_path / "a"), str(tmp_path / "b")), f)
            assert open(os.path.join(root, f), "rb").read() == open(other, "rb").read(), f


def test_config_validation():
    with pytest.raises(ValueError, match="unknown synth config"):
        SynthConfig.from_dict({"n_subjects": 3})
    with pytest.raises(ValueError):
        SynthConfig(sampling_rate_hz=60.0)
    with pytest.raises(ValueError):
        SynthConfig(effects=[{"condition": "L9", "band": "theta", "region": "frontal", "multiplier": 2}])
    cfg = SynthConfig.from_dict({"effects": [{"condition": "L7", "band": "alpha", "region": "frontal",
                                              "multiplier": 1.5}]})
    assert cfg.effects[0].region == tuple(FRONTAL)
