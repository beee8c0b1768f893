import os

import numpy as np
import pytest

from eegload.io import load_manifest, read_feature_table, write_feature_table
from eegload.pipeline import extract_dataset
from eegload.synth import SynthConfig, generate

SMALL_SYNTH = {"n_participants": 3, "epochs_per_condition": 6, "sampling_rate_hz": 250.0, "seed": 7}

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    out = str(tmp_path_factory.mktemp("small_ds"))
    generate(SynthConfig.from_dict(SMALL_SYNTH), out)
    return out


@pytest.fixture(scope="session")
def small_table(small_dataset, tmp_path_factory):
    manifest = load_manifest(os.path.join(small_dataset, "manifest.json"))
    rows, _ = extract_dataset(manifest, "all")
    path = str(tmp_path_factory.mktemp("small_tab") / "features.csv")
    write_feature_table(rows, path)
    return read_feature_table(path)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
