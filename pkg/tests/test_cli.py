import json
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from repcount.cli import run
from repcount.evaluate import evaluate, load_manifest
from repcount.synth import SynthSpec, write_fixture

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def eight(tmp_path):
    spec = SynthSpec(n_frames=128, dim=16, cycles=8, noise_snr_db=20, seed=8)
    write_fixture(spec, tmp_path, "f", temporal_seed=9)
    return tmp_path


def test_count_json(eight, capsys):
    assert run(["count", "--spatial", str(eight / "f.bin"), "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["count"] == 8
    assert list(out) == ["count", "peaks", "alpha", "band_count", "kept_energy_fraction", "stream"]


def test_count_table_and_out_file(eight, capsys):
    dest = eight / "report.txt"
    assert run(["count", "--spatial", str(eight / "f.bin"), "--temporal", str(eight / "f_temporal.bin"),
                "--fusion", "concat", "--out", str(dest)]) == 0
    text = dest.read_text()
    assert text.startswith("count") and "concat" in text


def test_count_without_input_is_usage_error(capsys):
    assert run(["count"]) == 1
    assert "usage:" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["count", "--spatial", "x", "--fusion", "sideways"],
    ["count", "--spatial", "x", "--gamma", "2"],
    ["count", "--spatial", "x", "--beta", "0"],
    ["sweep", "--manifest", "m.json", "--alphas", "1,b"],
])
def test_usage_errors(argv, capsys):
    assert run(argv) == 1
    assert "usage:" in capsys.readouterr().err


def test_data_errors(tmp_path, capsys):
    assert run(["count", "--spatial", str(tmp_path / "missing.bin")]) == 2
    assert "missing.bin" in capsys.readouterr().err
    (tmp_path / "bad.txt").write_text("1,2\n3\n")
    assert run(["count", "--spatial", str(tmp_path / "bad.txt")]) == 2
    err = capsys.readouterr().err
    assert "RaggedRows" in err and "line 2" in err
    assert run(["count", "--temporal", str(tmp_path / "bad.txt"), "--fusion", "spatial"]) == 2


def test_help_exits_zero(capsys):
    assert run(["--help"]) == 0
    assert "export-waveform" in capsys.readouterr().out


def test_alpha_and_no_fmf_flags(eight, capsys):
    run(["count", "--spatial", str(eight / "f.bin"), "--alpha", "20", "--format", "json"])
    assert json.loads(capsys.readouterr().out)["alpha"] == 20
    run(["count", "--spatial", str(eight / "f.bin"), "--no-fmf", "--format", "json"])
    out = json.loads(capsys.readouterr().out)
    assert out["alpha"] == 65 and out["kept_energy_fraction"] == 1.0


def test_ladder_flag(eight, tmp_path, capsys):
    (tmp_path / "ladder.json").write_text(json.dumps([[0, 9], [None, 30]]))
    run(["count", "--spatial", str(eight / "f.bin"), "--ladder", str(tmp_path / "ladder.json"),
         "--format", "json"])
    assert json.loads(capsys.readouterr().out)["alpha"] == 13  # guard: floor(1.5 * 8) + 1
    run(["count", "--spatial", str(eight / "f.bin"), "--ladder", str(tmp_path / "ladder.json"),
         "--no-keep-dominant", "--format", "json"])
    assert json.loads(capsys.readouterr().out)["alpha"] == 9
    (tmp_path / "bad.json").write_text(json.dumps([[3, 9], [1, 30]]))
    assert run(["count", "--spatial", str(eight / "f.bin"), "--ladder", str(tmp_path / "bad.json")]) == 1


def test_eval_on_shipped_fixtures_matches_library(capsys):
    manifest = FIXTURES / "manifest.json"
    assert run(["eval", "--manifest", str(manifest), "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    lib = evaluate(load_manifest(manifest))
    assert out["mae"] == lib.mae
    assert out["n_videos"] == 8 and out["failures"] == []
    assert run(["eval", "--manifest", str(manifest)]) == 0
    table = capsys.readouterr().out
    assert f"{lib.mae:.4f}" in table


def test_eval_multiple_manifests(capsys):
    m = str(FIXTURES / "manifest.json")
    assert run(["eval", "--manifest", m, "--manifest", m, "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert [r["dataset"] for r in out["summary"]][-2:] == ["overall (mean of datasets)", "overall (pooled)"]
    assert run(["eval", "--manifest", m, "--manifest", m]) == 0
    assert "overall (pooled)" in capsys.readouterr().out


def test_sweep_and_ablate(capsys):
    m = str(FIXTURES / "manifest.json")
    assert run(["sweep", "--manifest", m, "--format", "json"]) == 0
    rows = json.loads(capsys.readouterr().out)["rows"]
    assert [r["label"] for r in rows] == ["10", "15", "20", "25", "30", "35", "multi-stage"]
    assert run(["sweep", "--manifest", m, "--alphas", ""]) == 0
    assert capsys.readouterr().out.count("\n") == 3
    assert run(["ablate", "--manifest", m, "--format", "json"]) == 0
    rows = json.loads(capsys.readouterr().out)["rows"]
    assert len(rows) == 6


def test_synth_and_seed_override(tmp_path, capsys):
    (tmp_path / "spec.json").write_text(json.dumps(
        {"id": "x", "n_frames": 64, "dim": 3, "cycles": 4, "seed": 1, "format": "txt"}))
    assert run(["synth", "--spec", str(tmp_path / "spec.json"), "--out", str(tmp_path / "a")]) == 0
    assert run(["synth", "--spec", str(tmp_path / "spec.json"), "--out", str(tmp_path / "b"),
                "--seed", "77"]) == 0
    man = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert man == [{"id": "x", "spatial": "x.txt", "ground_truth": 4}]
    side = json.loads((tmp_path / "b" / "x.json").read_text())
    assert side["spec"]["seed"] == 77
    (tmp_path / "bad.json").write_text(json.dumps({"n_frames": 10, "dim": 3, "cycles": 4}))
    assert run(["synth", "--spec", str(tmp_path / "bad.json"), "--out", str(tmp_path / "c")]) == 2


def test_export_waveform(eight, tmp_path, capsys):
    dest = tmp_path / "wave.csv"
    assert run(["export-waveform", "--spatial", str(eight / "f.bin"), "--out", str(dest)]) == 0
    lines = dest.read_text().splitlines()
    assert lines[0].startswith("# alpha=15")
    assert lines[1] == "frame,raw,filtered,magnitude"
    data = np.array([[float(v) for v in line.split(",")] for line in lines[2:]])
    assert data.shape == (128, 4)
    assert data[:, 3].argmax() in (8, 120)
    assert run(["export-waveform", "--spatial", str(eight / "f.bin"), "--format", "json"]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert len(obj["raw"]) == len(obj["filtered"]) == len(obj["magnitude"]) == 128


def test_identical_runs_identical_bytes(eight, capsys):
    argv = ["count", "--spatial", str(eight / "f.bin"), "--format", "json"]
    run(argv)
    a = capsys.readouterr().out
    run(argv)
    assert capsys.readouterr().out == a


def test_module_entry_point(eight):
    proc = subprocess.run([sys.executable, "-m", "repcount", "count", "--spatial", str(eight / "f.bin"),
                           "--format", "json"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["count"] == 8
