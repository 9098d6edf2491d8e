"""Generation and ingestion of code patches (bar patterns and QR-like grids).

A patch is a small RGBA raster plus a binary foreground mask marking the
symbol region. Generated patterns are segmentation targets only; they do not
encode a valid payload.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import DatasetError, IngestError, InvalidSpecError

CLASS_BACKGROUND = 0
CLASS_BARCODE = 1
CLASS_QRCODE = 2
CLASS_NAMES = ("background", "barcode", "qrcode")

ORIGIN_GENERATED = "generated"
ORIGIN_INGESTED = "ingested"


@dataclass(frozen=True)
class BarcodeSpec:
    width_px: int
    height_px: int
    module_count: int
    quiet_zone_px: int


@dataclass(frozen=True)
class QrSpec:
    modules_per_side: int
    module_px: int
    quiet_zone_px: int


@dataclass
class PatchAsset:
    id: str
    image: np.ndarray  # (H, W, 4) uint8, full-opacity on generation
    mask: np.ndarray  # (H, W) uint8, values in {0, 1}
    class_id: int
    origin: str

    def validate(self) -> "PatchAsset":
        if self.image.ndim != 3 or self.image.shape[2] != 4:
            raise InvalidSpecError(f"patch {self.id}: image must be HxWx4 RGBA")
        if self.mask.shape != self.image.shape[:2]:
            raise InvalidSpecError(
                f"patch {self.id}: mask dims {self.mask.shape} != image dims {self.image.shape[:2]}"
            )
        if not np.isin(self.mask, (0, 1)).all():
            raise InvalidSpecError(f"patch {self.id}: mask must be binary")
        if not self.mask.any():
            raise InvalidSpecError(f"patch {self.id}: mask has no foreground pixels")
        if self.class_id not in (CLASS_BARCODE, CLASS_QRCODE):
            raise InvalidSpecError(f"patch {self.id}: class_id must be 1 or 2, got {self.class_id}")
        return self


def gen_barcode_patch(rng_seed: int, spec: BarcodeSpec, patch_id: str = "barcode") -> PatchAsset:
    """Render a random vertical bar pattern with a quiet zone.

    The first and last modules are forced dark so the symbol spans the full
    region between the quiet zones; the mask covers exactly that region
    (bars and inter-bar gaps, quiet zone excluded).
    """
    w, h, n, qz = spec.width_px, spec.height_px, spec.module_count, spec.quiet_zone_px
    if n < 8:
        raise InvalidSpecError(f"module_count must be >= 8, got {n}")
    if qz < 0:
        raise InvalidSpecError(f"quiet_zone_px must be >= 0, got {qz}")
    if w < n:
        raise InvalidSpecError(f"width_px {w} < module_count {n}")
    region_w = w - 2 * qz
    region_h = h - 2 * qz
    if region_w < n or region_h < 1:
        raise InvalidSpecError(
            f"spec {w}x{h} with quiet zone {qz} leaves no room for {n} modules"
        )

    rng = np.random.default_rng(rng_seed)
    modules = rng.integers(0, 2, size=n)
    modules[0] = 1
    modules[-1] = 1

    image = np.full((h, w, 4), 255, dtype=np.uint8)
    # integer column boundaries spreading region_w pixels over n modules
    bounds = qz + np.round(np.arange(n + 1) * region_w / n).astype(int)
    for i in range(n):
        if modules[i]:
            image[qz : h - qz, bounds[i] : bounds[i + 1], :3] = 0

    mask = np.zeros((h, w), dtype=np.uint8)
    mask[qz : h - qz, qz : w - qz] = 1
    return PatchAsset(patch_id, image, mask, CLASS_BARCODE, ORIGIN_GENERATED).validate()


_FINDER = np.zeros((7, 7), dtype=np.uint8)
for _r in range(7):
    for _c in range(7):
        _d = max(abs(_r - 3), abs(_c - 3))
        _FINDER[_r, _c] = 1 if (_d == 3 or _d <= 1) else 0


def gen_qr_patch(rng_seed: int, spec: QrSpec, patch_id: str = "qr") -> PatchAsset:
    """Render a QR-like module grid: three finder squares plus random modules."""
    n, mpx, qz = spec.modules_per_side, spec.module_px, spec.quiet_zone_px
    if n < 21 or n % 2 == 0:
        raise InvalidSpecError(f"modules_per_side must be odd and >= 21, got {n}")
    if mpx < 1:
        raise InvalidSpecError(f"module_px must be >= 1, got {mpx}")
    if qz < 0:
        raise InvalidSpecError(f"quiet_zone_px must be >= 0, got {qz}")

    rng = np.random.default_rng(rng_seed)
    grid = rng.integers(0, 2, size=(n, n)).astype(np.uint8)
    grid[0:7, 0:7] = _FINDER  # top-left
    grid[0:7, n - 7 : n] = _FINDER  # top-right
    grid[n - 7 : n, 0:7] = _FINDER  # bottom-left

    side = n * mpx + 2 * qz
    image = np.full((side, side, 4), 255, dtype=np.uint8)
    dark = np.kron(grid, np.ones((mpx, mpx), dtype=np.uint8)).astype(bool)
    region = image[qz : qz + n * mpx, qz : qz + n * mpx]
    region[dark, :3] = 0

    mask = np.zeros((side, side), dtype=np.uint8)
    mask[qz : qz + n * mpx, qz : qz + n * mpx] = 1
    return PatchAsset(patch_id, image, mask, CLASS_QRCODE, ORIGIN_GENERATED).validate()


def ingest_patch(image_path, mask_path, class_id: int, patch_id: str | None = None) -> PatchAsset:
    """Load a user-annotated patch; any nonzero mask pixel counts as foreground."""
    image_path, mask_path = Path(image_path), Path(mask_path)
    try:
        image = np.asarray(Image.open(image_path).convert("RGBA"))
    except OSError as e:
        raise IngestError(f"cannot read image {image_path}: {e}") from e
    try:
        raw_mask = np.asarray(Image.open(mask_path).convert("L"))
    except OSError as e:
        raise IngestError(f"cannot read mask {mask_path}: {e}") from e

    if raw_mask.shape != image.shape[:2]:
        raise IngestError(
            f"mask dims {raw_mask.shape} do not match image dims {image.shape[:2]} "
            f"({image_path.name} / {mask_path.name})"
        )
    mask = (raw_mask != 0).astype(np.uint8)
    if not mask.any():
        raise IngestError(f"mask {mask_path} has no foreground pixels")
    if class_id not in (CLASS_BARCODE, CLASS_QRCODE):
        raise IngestError(f"class_id must be 1 (barcode) or 2 (qrcode), got {class_id}")

    pid = patch_id if patch_id is not None else image_path.stem
    return PatchAsset(pid, image.copy(), mask, class_id, ORIGIN_INGESTED).validate()


def save_patches(assets: list[PatchAsset], out_dir) -> Path:
    """Persist patches as PNG pairs plus an index; returns the index path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seen = set()
    entries = []
    for asset in assets:
        if asset.id in seen:
            raise DatasetError(f"duplicate patch id {asset.id!r}")
        seen.add(asset.id)
        img_name = f"{asset.id}.png"
        mask_name = f"{asset.id}_mask.png"
        Image.fromarray(asset.image, mode="RGBA").save(out_dir / img_name)
        Image.fromarray(asset.mask * 255, mode="L").save(out_dir / mask_name)
        entries.append(
            {
                "id": asset.id,
                "image_path": img_name,
                "mask_path": mask_name,
                "class_id": asset.class_id,
                "origin": asset.origin,
                "width": int(asset.image.shape[1]),
                "height": int(asset.image.shape[0]),
            }
        )
    index_path = out_dir / "patches.json"
    with open(index_path, "w") as f:
        json.dump({"patches": entries}, f, indent=2, sort_keys=True)
        f.write("\n")
    return index_path


def load_patches(patch_dir) -> list[PatchAsset]:
    """Load every patch listed in a directory's index, in index order."""
    patch_dir = Path(patch_dir)
    index_path = patch_dir / "patches.json"
    if not index_path.exists():
        raise DatasetError(f"no patch index at {index_path}")
    with open(index_path) as f:
        index = json.load(f)
    assets = []
    for entry in index["patches"]:
        image = np.asarray(Image.open(patch_dir / entry["image_path"]).convert("RGBA"))
        raw = np.asarray(Image.open(patch_dir / entry["mask_path"]).convert("L"))
        mask = (raw != 0).astype(np.uint8)
        origin = entry.get("origin", ORIGIN_INGESTED)
        assets.append(
            PatchAsset(entry["id"], image.copy(), mask, int(entry["class_id"]), origin).validate()
        )
    return assets
