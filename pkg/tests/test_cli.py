import csv
import json
import os
import subprocess
import sys

import pytest

from eegload.cli import main

TINY = """synth:
  n_participants: 3
  epochs_per_condition: 5
  sampling_rate_hz: 250
grids:
  logreg: {C: [1.0], penalty: [l2]}
  svm: {C: [1.0], kernel: [linear]}
"""


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    cfg = root / "cfg.yaml"
    cfg.write_text(TINY)
    assert main(["synth-generate", "--config", str(cfg), "--out", str(root / "ds"), "--seed", "2"]) == 0
    for preset in ("all", "frontal", "frontal_parietal"):
        assert main(["extract-features", "--data", str(root / "ds" / "manifest.json"), "--preset", preset,
                     "--out", str(root / f"f_{preset}.csv")]) == 0
        assert main(["run-benchmark", "--config", str(cfg), "--features", str(root / f"f_{preset}.csv"),
                     "--models", "logreg,svm", "--tasks", "bin_37,multi_357",
                     "--out", str(root / f"res_{preset}")]) == 0
    return root


def test_list_features(capsys):
    assert main(["list-features"]) == 0
    names = capsys.readouterr().out.split()
    assert len(names) == 143 and names[0] == "t.mean"


def test_entry_point_help():
    out = subprocess.run([sys.executable, "-m", "eegload.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "run-benchmark" in out.stdout


def test_synth_requires_config(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["synth-generate", "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_usage_errors_exit_2(workspace, capsys):
    assert main(["synth-generate", "--config", str(workspace / "nope.yaml"), "--out", "x"]) == 2
    assert main(["run-benchmark", "--features", str(workspace / "f_all.csv"), "--models", "knn",
                 "--out", str(workspace / "x")]) == 2
    assert main(["extract-features", "--data", str(workspace / "ds" / "manifest.json"),
                 "--preset", "occipital", "--out", str(workspace / "x.csv")]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["run-benchmark", "--features", "f.csv", "--out", "x", "--jobs", "0"])
    assert exc.value.code == 2


def test_runtime_errors_exit_1(tmp_path, capsys):
    assert main(["run-benchmark", "--features", str(tmp_path / "missing.csv"), "--out", str(tmp_path)]) == 1
    assert "error:" in capsys.readouterr().err
    assert main(["extract-features", "--data", str(tmp_path / "m.json"), "--out", str(tmp_path / "f.csv")]) == 1


def test_sidecar_and_results(workspace):
    meta = json.load(open(workspace / "f_frontal.csv.meta.json"))
    assert meta["preset"] == "frontal" and meta["skipped_events"] == []
    run = json.load(open(workspace / "res_frontal" / "run.json"))
    assert run["preset"] == "frontal" and run["models"] == ["logreg", "svm"]
    recs = [json.loads(line) for line in open(workspace / "res_frontal" / "results.jsonl")]
    assert len(recs) == 3 * 2 * 2 and {r["preset"] for r in recs} == {"frontal"}
    for name in ("summary.csv", "summary.txt", "skips.json", "fig_cv_max.png"):
        assert (workspace / "res_frontal" / name).exists()


def test_compare_subsets_any_argument_order(workspace):
    out = workspace / "cmp.csv"
    assert main(["compare-subsets", "--results", str(workspace / "res_frontal"), str(workspace / "res_all"),
                 str(workspace / "res_frontal_parietal"), "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(out)))
    assert len(rows) == 2 * 2 * 3 * 3
    assert {r["pairing"] for r in rows} == {"all_vs_frontal", "all_vs_frontal_parietal",
                                           "frontal_parietal_vs_frontal"}
    assert (workspace / "cmp.png").exists()
    out2 = workspace / "cmp2.csv"
    main(["compare-subsets", "--results", str(workspace / "res_all"), str(workspace / "res_frontal"),
          str(workspace / "res_frontal_parietal"), "--out", str(out2), "--no-figures"])
    assert open(out).read() == open(out2).read()


def test_analyze_individuals(workspace):
    out = workspace / "ind.json"
    assert main(["analyze-individuals", "--results", str(workspace / "res_all"),
                 "--profiles", str(workspace / "ds" / "manifest.json"), "--out", str(out)]) == 0
    report = json.load(open(out))
    assert report["n_participants"] == 3
    assert os.path.exists(workspace / "ind.tests.csv")
    assert os.path.exists(workspace / "ind.optimal_tasks.csv")


def test_permuted_benchmark_flag(workspace):
    out = workspace / "perm"
    assert main(["run-benchmark", "--features", str(workspace / "f_all.csv"), "--models", "logreg",
                 "--tasks", "bin_37", "--config", str(workspace / "cfg.yaml"), "--permute-labels",
                 "--no-figures", "--out", str(out)]) == 0
    assert json.load(open(out / "run.json"))["permuted_labels"] is True
    assert not (out / "fig_cv_max.png").exists()
