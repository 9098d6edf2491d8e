"""Generate and load background images for scene synthesis.

Backgrounds are plain RGB PNGs in a directory; the file stem is the
background id. Generated styles are deterministic in (seed, index).
"""

from __future__ import annotations

from pathlib import Path

import cv2
import numpy as np
from PIL import Image

from .errors import DatasetError, InvalidSpecError

STYLES = ("flat", "gradient", "noise", "speckle")


def gen_background(rng: np.random.Generator, width: int, height: int, style: str) -> np.ndarray:
    if width < 32 or height < 32:
        raise InvalidSpecError(f"background {width}x{height} below 32x32 minimum")
    if style == "flat":
        color = rng.integers(120, 246, size=3, dtype=np.uint8)
        return np.full((height, width, 3), color, dtype=np.uint8)
    if style == "gradient":
        c0 = rng.integers(40, 216, size=3).astype(np.float64)
        c1 = rng.integers(40, 216, size=3).astype(np.float64)
        axis = int(rng.integers(2))
        n = height if axis == 0 else width
        t = np.linspace(0.0, 1.0, n)[:, None] if axis == 0 else np.linspace(0.0, 1.0, n)[None, :]
        t = np.broadcast_to(t, (height, width))[:, :, None]
        return np.clip(c0 * (1 - t) + c1 * t + 0.5, 0, 255).astype(np.uint8)
    if style == "noise":
        coarse = rng.integers(30, 226, size=(max(2, height // 48), max(2, width // 48), 3))
        img = cv2.resize(coarse.astype(np.uint8), (width, height), interpolation=cv2.INTER_LINEAR)
        return img
    if style == "speckle":
        base = rng.integers(150, 236, size=3).astype(np.int16)
        jitter = rng.integers(-18, 19, size=(height, width, 1), dtype=np.int16)
        return np.clip(base[None, None, :] + jitter, 0, 255).astype(np.uint8)
    raise InvalidSpecError(f"unknown background style {style!r}")


def gen_backgrounds(
    out_dir: str | Path,
    count: int,
    width: int,
    height: int,
    seed: int,
    styles: tuple[str, ...] = STYLES,
) -> list[str]:
    """Write count backgrounds cycling through styles; returns the ids."""
    if count < 1:
        raise InvalidSpecError(f"background count must be >= 1, got {count}")
    for s in styles:
        if s not in STYLES:
            raise InvalidSpecError(f"unknown background style {s!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ids = []
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        img = gen_background(rng, width, height, styles[i % len(styles)])
        bg_id = f"bg_{i:03d}"
        Image.fromarray(img).save(out / f"{bg_id}.png")
        ids.append(bg_id)
    return ids


def load_backgrounds(bg_dir: str | Path) -> list[tuple[str, np.ndarray]]:
    """Load every PNG in the directory as (id, RGB array), sorted by filename."""
    paths = sorted(Path(bg_dir).glob("*.png"))
    if not paths:
        raise DatasetError(f"no background PNGs found in {bg_dir}")
    out = []
    for p in paths:
        img = np.asarray(Image.open(p).convert("RGB"))
        out.append((p.stem, img))
    return out
