"""Evaluation: prediction export in the dataset's mask format plus metrics.

Predictions are written as 8-bit grayscale PNGs named pred_{id:06d}.png at the
original image resolution, so the dataset tooling's own `eval` CLI can score
them independently. `cross_check=True` runs that CLI and demands exact
agreement of the integer confusion counts — any format drift fails loudly.
"""

import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F
from PIL import Image

from .data import load_image, load_mask, manifest_entries, read_manifest, to_input
from .errors import EvalError
from .metrics import confusion_update, metrics_report, new_counts


def predict_mask(model, image: np.ndarray, input_size: int) -> np.ndarray:
    """Segment one RGB image; returns a uint8 mask at the image's resolution."""
    h, w = image.shape[:2]
    model.eval()
    with torch.no_grad():
        out = model(to_input(image, input_size)[None])
        logits = out[0] if isinstance(out, tuple) else out
        logits = F.interpolate(logits, size=(h, w), mode="bilinear", align_corners=False)
        return logits.argmax(dim=1)[0].numpy().astype(np.uint8)


def evaluate(model, manifest_path, split: str = "val", out_dir=None,
             input_size: int = None, cross_check: bool = False) -> dict:
    """Score a model over one split; optionally write prediction PNGs.

    `cross_check` requires `out_dir` and verifies the written predictions
    against the dataset CLI's scoring (exact integer confusion equality).
    """
    if input_size is None:
        input_size = model.config.input_size
    if cross_check and out_dir is None:
        raise EvalError("cross_check requires out_dir for prediction files")
    manifest = read_manifest(manifest_path)
    base_dir = Path(manifest_path).parent
    entries = manifest_entries(manifest, split)
    if not entries:
        raise EvalError(f"no entries in split {split!r}")
    num_classes = len(manifest["class_names"])
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)

    counts = new_counts(num_classes)
    for entry in entries:
        image = load_image(base_dir / entry["image_path"])
        gt = load_mask(base_dir / entry["mask_path"], num_classes)
        pred = predict_mask(model, image, input_size)
        confusion_update(counts, pred, gt)
        if out_dir is not None:
            Image.fromarray(pred, mode="L").save(
                out_dir / f"pred_{int(entry['id']):06d}.png")

    report = metrics_report(counts, manifest["class_names"])
    report["split"] = split
    report["n_images"] = len(entries)
    if cross_check:
        report["cross_check"] = run_cross_check(report, manifest_path, out_dir, split)
    return report


def run_cross_check(report: dict, manifest_path, pred_dir, split: str) -> dict:
    """Score the written predictions with the dataset CLI and compare exactly."""
    proc = subprocess.run(
        [sys.executable, "-m", "codesynth", "eval",
         "--manifest", str(manifest_path), "--pred-dir", str(pred_dir),
         "--split", split],
        capture_output=True, text=True)
    if proc.returncode != 0:
        raise EvalError(f"dataset CLI eval failed: {proc.stderr.strip()}")
    external = json.loads(proc.stdout)
    if external["confusion"] != report["confusion"]:
        raise EvalError(
            f"confusion mismatch: in-process {report['confusion']} "
            f"vs CLI {external['confusion']}")
    if abs(external["miou"] - report["miou"]) > 1e-9:
        raise EvalError(
            f"mIoU mismatch: in-process {report['miou']} vs CLI {external['miou']}")
    return {"miou": external["miou"], "agrees": True}
