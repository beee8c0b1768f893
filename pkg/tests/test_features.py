import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import stats as sst

from eegload.catalog import FEATURE_NAMES, N_FEATURES
from eegload.features import (descriptors, extract, plan_windows, spectral_features,
                              temporal_features, window_features)
from eegload.montage import MONTAGE_64, hemisphere, hemisphere_indices, resolve_preset
from eegload.preprocessing import Epoch

FS = 250.0


def _epoch(rng, channels=("F3", "Fz", "F4", "P3", "P4"), seconds=6.0):
    return Epoch(rng.normal(size=(len(channels), int(seconds * FS))), FS, channels, "L3")


def test_catalog_partition():
    assert N_FEATURES == 143 and len(set(FEATURE_NAMES)) == 143
    fams = [n.split(".")[0] for n in FEATURE_NAMES]
    assert (fams.count("t"), fams.count("sp"), fams.count("ts")) == (13, 22, 108)
    # families are contiguous in that order
    assert fams == ["t"] * 13 + ["sp"] * 22 + ["ts"] * 108


def test_five_windows_per_epoch(rng):
    ep = _epoch(rng)
    wins = plan_windows(ep)
    assert [(w.start, w.stop) for w in wins] == [(i * 250, i * 250 + 500) for i in range(5)]
    out = extract(ep)
    assert [i for i, _ in out] == list(range(5))
    assert all(v.values.shape == (143,) and np.all(np.isfinite(v.values)) for _, v in out)


def test_short_epoch_rejected(rng):
    with pytest.raises(ValueError):
        plan_windows(_epoch(rng, seconds=1.5))


def test_temporal_features_against_scipy(rng):
    x = rng.normal(size=(1, 500)) * 2 + 1
    t = temporal_features(x)
    v = x[0]
    assert t[0] == pytest.approx(v.mean())
    assert t[1] == pytest.approx(v.std())
    assert t[4] == pytest.approx(np.abs(v).max())
    assert t[6] == pytest.approx(np.sqrt(np.mean(v ** 2)))
    assert t[8] == pytest.approx(sst.skew(v))
    assert t[9] == pytest.approx(sst.kurtosis(v))
    assert t[10] == pytest.approx(v.var())


def test_hjorth_of_sine():
    # mobility of a sampled sine is 2 sin(pi f / fs) (discrete derivative), complexity about 1
    f = 10.0
    x = np.sin(2 * np.pi * f * np.arange(2000) / FS)
    t = temporal_features(x)
    assert t[11] == pytest.approx(2 * np.sin(np.pi * f / FS), rel=1e-3)
    assert t[12] == pytest.approx(1.0, abs=1e-2)


def test_zero_crossing_rate():
    x = np.array([1.0, -1.0, 1.0, -1.0, 1.0, 1.0, 1.0, 1.0])
    assert temporal_features(x)[7] == pytest.approx(4 / 8)


def test_constant_window_is_finite():
    t = temporal_features(np.full((3, 100), 5.0))
    assert np.all(np.isfinite(t))
    assert t[1] == 0.0 and t[8] == 0.0 and t[9] == 0.0 and t[11] == 0.0


def test_descriptors_oracle(rng):
    v = rng.normal(size=64) ** 2
    d, flags = descriptors(v)
    q1, q3 = np.percentile(v, [25, 75])
    p = v / v.sum()
    expect = [v.mean(), v.std(), v.min(), v.max(), np.median(v), q3 - q1, v.std() / v.mean(),
              sst.skew(v), sst.kurtosis(v), sst.entropy(p), v.max(),
              np.mean(np.abs(v - v.mean()) > 5 * v.std())]
    np.testing.assert_allclose(d, expect, rtol=1e-9)
    assert flags == ()


def test_single_channel_descriptors_flagged():
    d, flags = descriptors([3.0])
    assert flags == ("ts:single_channel",)
    assert np.all(np.isfinite(d))


def test_missing_hemisphere_flags(rng):
    ep = _epoch(rng, channels=("Fz", "Cz", "Pz"))
    fv = window_features(ep.data[:, :500], ep.channel_names, FS)
    assert fv.values.shape == (143,)
    assert any("missing_hemisphere" in f for f in fv.flags)
    assert any("missing_channels" in f for f in fv.flags)


def test_regional_asymmetry_sign(rng):
    # stronger right-frontal alpha gives positive frontal alpha asymmetry
    t = np.arange(500) / FS
    alpha = np.sin(2 * np.pi * 10 * t)
    data = 0.1 * rng.normal(size=(2, 500))
    data[1] += 3 * alpha  # F4 (right)
    data[0] += alpha      # F3 (left)
    sp, _ = spectral_features(data, ("F3", "F4"), FS)
    idx = FEATURE_NAMES.index("sp.alpha_asy.frontal") - 13
    assert sp[idx] == pytest.approx(np.log(9.0), abs=0.05)


def test_hemisphere_rules():
    assert hemisphere("F3") == "left" and hemisphere("F4") == "right" and hemisphere("Fz") is None
    left, right = hemisphere_indices(("F3", "Fz", "F4"))
    assert left == [0] and right == [2]


def test_presets_are_in_montage():
    for name in ("all", "frontal", "frontal_parietal"):
        chans = resolve_preset(name, MONTAGE_64)
        assert set(chans) <= set(MONTAGE_64)
    assert len(resolve_preset("all", MONTAGE_64)) == 64
    with pytest.raises(ValueError):
        resolve_preset("occipital", MONTAGE_64)
    assert resolve_preset("frontal", MONTAGE_64, {"frontal": ["Fz"]}) == ("Fz",)


@settings(max_examples=25, deadline=None)
@given(arrays(np.float64, (4, 500), elements=st.floats(-200, 200)))
def test_any_window_gives_finite_vector(x):
    fv = window_features(x, ("F3", "F4", "P3", "P4"), FS)
    assert fv.values.shape == (143,) and np.all(np.isfinite(fv.values))
