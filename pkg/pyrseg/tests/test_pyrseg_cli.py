"""Command-line interface end to end."""

import json
import subprocess
import sys


def run(*args):
    return subprocess.run([sys.executable, "-m", "pyrseg", *args],
                          capture_output=True, text=True)


def test_summary_command():
    proc = run("summary", "--backbone", "toy18", "--input-size", "64",
               "--prm-source", "res1", "--prm-op", "two_convs")
    assert proc.returncode == 0, proc.stderr
    info = json.loads(proc.stdout)
    assert info["parameter_count"] > 0
    assert info["config"]["backbone_depth"] == "toy18"
    assert any(layer["name"] == "prm" for layer in info["layers"])


def test_train_then_eval_round(tiny_manifest, tmp_path):
    out = tmp_path / "run"
    proc = run("train", "--manifest", str(tiny_manifest), "--out", str(out),
               "--backbone", "toy18", "--input-size", "64",
               "--prm-source", "res1", "--prm-op", "two_convs",
               "--epochs", "1", "--batch-size", "4", "--lr", "0.01",
               "--val-every", "0", "--seed", "1")
    assert proc.returncode == 0, proc.stderr
    result = json.loads(proc.stdout)
    assert (out / "checkpoint.pt").is_file()
    assert (out / "train_log.jsonl").is_file()
    assert result["epochs"] == 1

    preds = tmp_path / "preds"
    proc = run("eval", "--checkpoint", str(out / "checkpoint.pt"),
               "--manifest", str(tiny_manifest), "--split", "val",
               "--out", str(preds), "--cross-check")
    assert proc.returncode == 0, proc.stderr
    report = json.loads(proc.stdout)
    assert report["n_images"] == 3
    assert report["cross_check"]["agrees"] is True
    assert len(list(preds.glob("pred_*.png"))) == 3


def test_eval_missing_checkpoint_errors(tiny_manifest, tmp_path):
    proc = run("eval", "--checkpoint", str(tmp_path / "nope.pt"),
               "--manifest", str(tiny_manifest))
    assert proc.returncode == 1
    err = json.loads(proc.stderr)
    assert err["error"] == "TrainingError"


def test_invalid_net_config_errors(tiny_manifest, tmp_path):
    proc = run("train", "--manifest", str(tiny_manifest),
               "--out", str(tmp_path / "x"), "--prm-source", "res3",
               "--prm-op", "two_convs", "--epochs", "1")
    assert proc.returncode == 1
    err = json.loads(proc.stderr)
    assert err["error"] == "ModelConfigError"
