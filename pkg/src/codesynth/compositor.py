"""Render scene plans: paste transformed patches onto a background and build the label mask.

Pasting is an alpha-aware copy, not a blend: wherever the transformed patch has
alpha > 0 the background pixel is replaced by the patch RGB. Labels are written
wherever the patch foreground mask is 1, overwriting earlier pastes (later
pastes sit on top). Pixels landing outside the canvas are dropped.
"""

from __future__ import annotations

import numpy as np

from . import transforms
from .errors import RenderError
from .patches import PatchAsset
from .sampler import ScenePlan


def paste(
    canvas: np.ndarray,
    label: np.ndarray,
    patch_image: np.ndarray,
    patch_mask: np.ndarray,
    x0: int,
    y0: int,
    class_id: int,
) -> None:
    """Paste one transformed RGBA patch with its top-left at (x0, y0), in place."""
    if patch_image.ndim != 3 or patch_image.shape[2] != 4:
        raise RenderError(f"patch image must be HxWx4, got {patch_image.shape}")
    if patch_mask.shape != patch_image.shape[:2]:
        raise RenderError("patch mask dims differ from patch image dims")
    if not np.isin(patch_mask, (0, 1)).all():
        raise RenderError("patch mask must be binary {0,1}")
    ch, cw = label.shape
    ph, pw = patch_mask.shape
    cx0, cy0 = max(x0, 0), max(y0, 0)
    cx1, cy1 = min(x0 + pw, cw), min(y0 + ph, ch)
    if cx0 >= cx1 or cy0 >= cy1:
        return
    img_roi = patch_image[cy0 - y0 : cy1 - y0, cx0 - x0 : cx1 - x0]
    mask_roi = patch_mask[cy0 - y0 : cy1 - y0, cx0 - x0 : cx1 - x0]
    visible = img_roi[:, :, 3] > 0
    canvas_roi = canvas[cy0:cy1, cx0:cx1]
    canvas_roi[visible] = img_roi[:, :, :3][visible]
    label[cy0:cy1, cx0:cx1][mask_roi == 1] = class_id


def render(
    background: np.ndarray, plan: ScenePlan, assets: dict[str, PatchAsset]
) -> tuple[np.ndarray, np.ndarray]:
    """Apply every planned paste in z-order; returns (RGB image, label mask)."""
    if background.ndim != 3 or background.shape[2] != 3 or background.dtype != np.uint8:
        raise RenderError(f"background must be uint8 HxWx3, got {background.shape} {background.dtype}")
    h, w = background.shape[:2]
    if (w, h) != (plan.width, plan.height):
        raise RenderError(f"background {w}x{h} does not match plan {plan.width}x{plan.height}")
    canvas = background.copy()
    label = np.zeros((h, w), dtype=np.uint8)
    for pp in sorted(plan.pastes, key=lambda p: p.z):
        asset = assets.get(pp.patch_id)
        if asset is None:
            raise RenderError(f"plan references unknown patch {pp.patch_id!r}")
        timg, tmask = transforms.apply(asset.image, asset.mask, pp.params)
        paste(canvas, label, timg, tmask, pp.x, pp.y, asset.class_id)
    return canvas, label
