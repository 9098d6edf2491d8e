"""Dataset access through the manifest contract.

The manifest is a JSON file with class_names and entries carrying image/mask
paths (relative to the manifest's directory) and a train/val split tag. Masks
are 8-bit grayscale PNGs holding raw class ids. Nothing here depends on the
package that wrote the files — the JSON and PNG formats are the interface.
"""

import json
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from .errors import DataError

SPLITS = ("train", "val", "all")


def read_manifest(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"manifest not found: {path}")
    try:
        manifest = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise DataError(f"manifest is not valid JSON: {e}") from e
    for key in ("version", "global_seed", "class_names", "entries"):
        if key not in manifest:
            raise DataError(f"manifest: missing key {key!r}")
    if not isinstance(manifest["entries"], list) or not manifest["entries"]:
        raise DataError("manifest: entries must be a non-empty list")
    for i, entry in enumerate(manifest["entries"]):
        for key in ("id", "image_path", "mask_path", "split"):
            if key not in entry:
                raise DataError(f"entries[{i}]: missing key {key!r}")
        if entry["split"] not in ("train", "val"):
            raise DataError(f"entries[{i}].split: {entry['split']!r}")
    return manifest


def manifest_entries(manifest: dict, split: str) -> list:
    if split not in SPLITS:
        raise DataError(f"split must be one of {SPLITS}, got {split!r}")
    if split == "all":
        return list(manifest["entries"])
    return [e for e in manifest["entries"] if e["split"] == split]


def load_image(path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"image not found: {path}")
    return np.asarray(Image.open(path).convert("RGB"))


def load_mask(path, num_classes: int) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"mask not found: {path}")
    mask = np.asarray(Image.open(path))
    if mask.ndim != 2:
        raise DataError(f"mask must be single-channel: {path}")
    if mask.max(initial=0) >= num_classes:
        raise DataError(f"mask values exceed {num_classes - 1}: {path}")
    return mask.astype(np.uint8)


def to_input(image: np.ndarray, size: int) -> torch.Tensor:
    """HWC uint8 -> 3xSxS float tensor scaled to [-1, 1]."""
    pil = Image.fromarray(image).resize((size, size), Image.BILINEAR)
    arr = np.asarray(pil, dtype=np.float32) / 127.5 - 1.0
    return torch.from_numpy(arr.transpose(2, 0, 1).copy())


def resize_mask(mask: np.ndarray, width: int, height: int) -> np.ndarray:
    if mask.shape == (height, width):
        return mask
    pil = Image.fromarray(mask).resize((width, height), Image.NEAREST)
    return np.asarray(pil)


class SegDataset(torch.utils.data.Dataset):
    """(image, mask) pairs resized to the model input size.

    Iteration order is the manifest's entry order for the chosen split;
    shuffling is the trainer's job so the order stays seed-deterministic.
    """

    def __init__(self, manifest_path, split: str, input_size: int):
        self.manifest = read_manifest(manifest_path)
        self.base_dir = Path(manifest_path).parent
        self.entries = manifest_entries(self.manifest, split)
        if not self.entries:
            raise DataError(f"no entries in split {split!r}")
        self.num_classes = len(self.manifest["class_names"])
        self.input_size = input_size

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i: int):
        entry = self.entries[i]
        image = load_image(self.base_dir / entry["image_path"])
        mask = load_mask(self.base_dir / entry["mask_path"], self.num_classes)
        x = to_input(image, self.input_size)
        y = torch.from_numpy(
            resize_mask(mask, self.input_size, self.input_size).astype(np.int64))
        return x, y
