"""Dataset persistence: scene generation orchestration, PNG/manifest IO, split, stats.

Layout under the output directory:

  images/img_{id:06}.png   8-bit RGB scenes
  masks/mask_{id:06}.png   8-bit single-channel label masks with raw ids {0,1,2}
  masks_color/…            optional green/yellow visualization (colorize=True)
  manifest.json            index: version, global_seed, class_names, entries, config_snapshot

The whole pipeline is deterministic in (global_seed, config, asset set): scene i
uses its own generator seeded with global_seed xor i, so worker count and
completion order never change the output bytes.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from PIL import Image

from .backgrounds import load_backgrounds
from .compositor import render
from .config import RunConfig
from .errors import DatasetError
from .patches import CLASS_NAMES, PatchAsset, load_patches
from .sampler import plan_scene

MANIFEST_VERSION = "1"
COLOR_TABLE = np.array([[0, 0, 0], [0, 255, 0], [255, 255, 0]], dtype=np.uint8)


def save_image(image: np.ndarray, path: str | Path) -> None:
    Image.fromarray(image, mode="RGB").save(path)


def load_image(path: str | Path) -> np.ndarray:
    try:
        return np.asarray(Image.open(path).convert("RGB"))
    except OSError as e:
        raise DatasetError(f"cannot read image {path}: {e}") from e


def save_mask(mask: np.ndarray, path: str | Path) -> None:
    if mask.dtype != np.uint8 or mask.ndim != 2:
        raise DatasetError("mask must be a 2-d uint8 array")
    Image.fromarray(mask, mode="L").save(path)


def load_mask(path: str | Path) -> np.ndarray:
    try:
        img = Image.open(path)
    except OSError as e:
        raise DatasetError(f"cannot read mask {path}: {e}") from e
    if img.mode != "L":
        img = img.convert("L")
    return np.asarray(img)


def colorize_mask(mask: np.ndarray) -> np.ndarray:
    """Raw ids to a visualization: background black, barcode green, QR yellow."""
    return COLOR_TABLE[mask]


def split_assignments(n: int, seed: int) -> list[str]:
    """Deterministic shuffled 4:1 train/val assignment by entry index."""
    if n < 5:
        raise DatasetError(f"split needs >= 5 entries, got {n}")
    n_val = round(n / 5)
    perm = np.random.default_rng([seed, 1]).permutation(n)
    out = ["train"] * n
    for i in perm[:n_val]:
        out[int(i)] = "val"
    return out


def _render_scene(
    scene_id: int,
    seed: int,
    bg_id: str,
    bg_img: np.ndarray,
    assets: list[PatchAsset],
    assets_by_id: dict[str, PatchAsset],
    cfg: RunConfig,
    out: Path,
) -> dict:
    rng = np.random.default_rng(seed ^ scene_id)
    h, w = bg_img.shape[:2]
    plan = plan_scene(rng, bg_id, w, h, assets, cfg.sampler, cfg.transforms)
    image, label = render(bg_img, plan, assets_by_id)
    image_rel = f"images/img_{scene_id:06d}.png"
    mask_rel = f"masks/mask_{scene_id:06d}.png"
    save_image(image, out / image_rel)
    save_mask(label, out / mask_rel)
    if cfg.dataset.colorize:
        Image.fromarray(colorize_mask(label), mode="RGB").save(out / "masks_color" / f"mask_{scene_id:06d}.png")
    return {
        "id": scene_id,
        "image_path": image_rel,
        "mask_path": mask_rel,
        "background_id": bg_id,
        "paste_count": len(plan.pastes),
    }


def generate_dataset(
    cfg: RunConfig,
    backgrounds_dir: str | Path,
    patches_dir: str | Path,
    out_dir: str | Path,
    jobs: int = 1,
    log_fn=None,
) -> dict:
    """Render scenes_per_background scenes per background and write the dataset."""
    backgrounds = load_backgrounds(backgrounds_dir)
    assets = load_patches(patches_dir)
    assets_by_id = {a.id: a for a in assets}
    out = Path(out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    (out / "masks").mkdir(parents=True, exist_ok=True)
    if cfg.dataset.colorize:
        (out / "masks_color").mkdir(parents=True, exist_ok=True)

    tasks = []
    scene_id = 0
    for bg_id, bg_img in backgrounds:
        for _ in range(cfg.dataset.scenes_per_background):
            tasks.append((scene_id, bg_id, bg_img))
            scene_id += 1

    def run(task):
        sid, bg_id, bg_img = task
        return _render_scene(sid, cfg.seed, bg_id, bg_img, assets, assets_by_id, cfg, out)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            entries = []
            for entry in pool.map(run, tasks):
                entries.append(entry)
                if log_fn:
                    log_fn(entry)
    else:
        entries = []
        for task in tasks:
            entry = run(task)
            entries.append(entry)
            if log_fn:
                log_fn(entry)

    entries.sort(key=lambda e: e["id"])
    assignments = split_assignments(len(entries), cfg.seed)
    for entry, s in zip(entries, assignments):
        entry["split"] = s
    manifest = {
        "version": MANIFEST_VERSION,
        "global_seed": cfg.seed,
        "class_names": list(CLASS_NAMES),
        "entries": entries,
        "config_snapshot": cfg.to_dict(),
    }
    with open(out / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")
    return manifest


def load_manifest(path: str | Path) -> dict:
    try:
        with open(path) as f:
            manifest = json.load(f)
    except OSError as e:
        raise DatasetError(f"cannot read manifest {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise DatasetError(f"manifest {path} is not valid JSON: {e}") from e
    validate_manifest(manifest, Path(path).parent, check_files=False)
    return manifest


def validate_manifest(manifest: dict, base_dir: str | Path, check_files: bool = True) -> None:
    """Schema check, split-ratio check, and (optionally) file existence + dims."""
    if not isinstance(manifest, dict):
        raise DatasetError("manifest: expected an object")
    if manifest.get("version") != MANIFEST_VERSION:
        raise DatasetError(f"manifest.version: expected {MANIFEST_VERSION!r}, got {manifest.get('version')!r}")
    if manifest.get("class_names") != list(CLASS_NAMES):
        raise DatasetError(f"manifest.class_names: expected {list(CLASS_NAMES)}")
    if not isinstance(manifest.get("global_seed"), int):
        raise DatasetError("manifest.global_seed: expected an integer")
    entries = manifest.get("entries")
    if not isinstance(entries, list) or not entries:
        raise DatasetError("manifest.entries: expected a non-empty list")
    base = Path(base_dir)
    n_train = 0
    for i, e in enumerate(entries):
        for key in ("id", "image_path", "mask_path", "split", "background_id", "paste_count"):
            if key not in e:
                raise DatasetError(f"manifest.entries[{i}]: missing {key!r}")
        if e["split"] not in ("train", "val"):
            raise DatasetError(f"manifest.entries[{i}].split: {e['split']!r}")
        n_train += e["split"] == "train"
        if check_files:
            img = load_image(base / e["image_path"])
            mask = load_mask(base / e["mask_path"])
            if img.shape[:2] != mask.shape:
                raise DatasetError(
                    f"manifest.entries[{i}]: image {img.shape[:2]} vs mask {mask.shape} dims differ"
                )
            if not np.isin(mask, (0, 1, 2)).all():
                raise DatasetError(f"manifest.entries[{i}]: mask values outside {{0,1,2}}")
    n = len(entries)
    n_val = n - n_train
    if n >= 5 and abs(n_val - n / 5) > 1:
        raise DatasetError(f"manifest split {n_train}:{n_val} is not 4:1 within one entry")


def dataset_stats(manifest: dict, base_dir: str | Path) -> dict:
    """Per-class pixel fractions, paste-count histogram, and per-split counts."""
    base = Path(base_dir)
    pixel_counts = np.zeros(3, dtype=np.int64)
    hist = {k: 0 for k in range(1, 10)}
    splits = {"train": 0, "val": 0}
    for e in manifest["entries"]:
        mask = load_mask(base / e["mask_path"])
        pixel_counts += np.bincount(mask.reshape(-1), minlength=3)[:3]
        k = int(e["paste_count"])
        if not 1 <= k <= 9:
            raise DatasetError(f"entry {e['id']}: paste_count {k} outside [1, 9]")
        hist[k] += 1
        splits[e["split"]] += 1
    total = int(pixel_counts.sum())
    return {
        "n_entries": len(manifest["entries"]),
        "images_per_split": splits,
        "paste_count_histogram": hist,
        "per_class_pixel_fraction": (pixel_counts / total).tolist(),
        "total_pixels": total,
        "class_names": list(CLASS_NAMES),
    }
