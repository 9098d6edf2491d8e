"""Shared fixtures: small datasets produced through the dataset CLI."""

import json
import subprocess
import sys

import pytest


def run_cli(*args):
    proc = subprocess.run([sys.executable, "-m", "codesynth", *args],
                          capture_output=True, text=True)
    assert proc.returncode == 0, f"codesynth {args[0]} failed: {proc.stderr}"
    return proc


def build_dataset(root, config, n_backgrounds, width, height, styles=None):
    cfg_path = root / "config.json"
    cfg_path.write_text(json.dumps(config))
    run_cli("patches", "--config", str(cfg_path), "--out", str(root / "patches"))
    bg_args = ["backgrounds", "--count", str(n_backgrounds),
               "--width", str(width), "--height", str(height),
               "--seed", str(config.get("seed", 0)), "--out", str(root / "bgs")]
    if styles:
        bg_args += ["--styles", styles]
    run_cli(*bg_args)
    run_cli("synth", "--config", str(cfg_path), "--backgrounds", str(root / "bgs"),
            "--patches", str(root / "patches"), "--out", str(root / "data"))
    return root / "data" / "manifest.json"


@pytest.fixture(scope="session")
def tiny_manifest(tmp_path_factory):
    """15 mixed scenes at 128x96: 12 train / 3 val."""
    root = tmp_path_factory.mktemp("tiny")
    config = {"seed": 3, "dataset": {"scenes_per_background": 5}}
    return build_dataset(root, config, n_backgrounds=3, width=128, height=96)


@pytest.fixture(scope="session")
def overfit_manifest(tmp_path_factory):
    """8 moderate scenes at native 128x128 (no resize during training)."""
    root = tmp_path_factory.mktemp("overfit")
    config = {
        "seed": 5,
        "transforms": {"scale": [0.6, 2.0], "degrade_prob": 0.0,
                       "darken": [0.7, 1.0]},
        "dataset": {"scenes_per_background": 4},
    }
    return build_dataset(root, config, n_backgrounds=2, width=128, height=128,
                         styles="flat,gradient")
