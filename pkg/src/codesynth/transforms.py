"""Per-patch transformation chain: resize, rotate, corner crop, darken, degrade.

All operations take an RGBA image and a binary mask and return new arrays.
Images are interpolated bilinearly, masks with nearest-neighbor so label
values stay crisp. Identity parameters return exact copies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import cv2
import numpy as np

from .errors import InvalidSpecError

CORNERS = ("TL", "TR", "BL", "BR")


@dataclass(frozen=True)
class CropParams:
    corner: str
    ratio: float


@dataclass(frozen=True)
class DegradeParams:
    down_factor: float


@dataclass(frozen=True)
class TransformParams:
    scale: float
    angle_deg: float
    crop: CropParams | None
    darken: float
    degrade: DegradeParams | None

    def validate(self) -> "TransformParams":
        if not 0.2 <= self.scale <= 5.0:
            raise InvalidSpecError(f"scale {self.scale} outside [0.2, 5.0]")
        if not -45.0 <= self.angle_deg <= 45.0:
            raise InvalidSpecError(f"angle {self.angle_deg} outside [-45, 45]")
        if self.crop is not None:
            if self.crop.corner not in CORNERS:
                raise InvalidSpecError(f"unknown corner {self.crop.corner!r}")
            if not 0.5 <= self.crop.ratio <= 1.0:
                raise InvalidSpecError(f"crop ratio {self.crop.ratio} outside [0.5, 1.0]")
        if not 0.5 <= self.darken <= 1.0:
            raise InvalidSpecError(f"darken {self.darken} outside [0.5, 1.0]")
        if self.degrade is not None and not 0.0 < self.degrade.down_factor < 1.0:
            raise InvalidSpecError(f"down_factor {self.degrade.down_factor} outside (0, 1)")
        return self


@dataclass(frozen=True)
class TransformRanges:
    """Sampling distribution for TransformParams; defaults follow the synthesis rules."""

    scale: tuple[float, float] = (0.2, 5.0)
    angle_deg: tuple[float, float] = (-45.0, 45.0)
    crop_prob: float = 0.1
    crop_ratio: tuple[float, float] = (0.5, 1.0)
    darken: tuple[float, float] = (0.5, 1.0)
    degrade_prob: float = 0.5
    down_factor: tuple[float, float] = (0.3, 0.8)

    def validate(self) -> "TransformRanges":
        for name in ("scale", "angle_deg", "crop_ratio", "darken", "down_factor"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise InvalidSpecError(f"transforms.{name}: empty range [{lo}, {hi}]")
        for name in ("crop_prob", "degrade_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise InvalidSpecError(f"transforms.{name}: probability {p} outside [0, 1]")
        return self


DEFAULT_RANGES = TransformRanges()


def sample_params(rng: np.random.Generator, ranges: TransformRanges = DEFAULT_RANGES) -> TransformParams:
    """Draw one parameter set. Darkening is always applied (factor 1 = no-op)."""
    scale = rng.uniform(*ranges.scale)
    angle = rng.uniform(*ranges.angle_deg)
    crop = None
    if rng.random() < ranges.crop_prob:
        corner = CORNERS[rng.integers(4)]
        crop = CropParams(corner, rng.uniform(*ranges.crop_ratio))
    darken_f = rng.uniform(*ranges.darken)
    degrade_p = None
    if rng.random() < ranges.degrade_prob:
        degrade_p = DegradeParams(rng.uniform(*ranges.down_factor))
    return TransformParams(scale, angle, crop, darken_f, degrade_p)


def resize(image: np.ndarray, mask: np.ndarray, ratio: float) -> tuple[np.ndarray, np.ndarray]:
    """Scale both rasters; output dims are max(1, floor(dim * ratio))."""
    if ratio <= 0:
        raise InvalidSpecError(f"resize ratio must be > 0, got {ratio}")
    if ratio == 1.0:
        return image.copy(), mask.copy()
    h, w = mask.shape
    new_w = max(1, math.floor(w * ratio))
    new_h = max(1, math.floor(h * ratio))
    out_img = cv2.resize(image, (new_w, new_h), interpolation=cv2.INTER_LINEAR)
    out_mask = cv2.resize(mask, (new_w, new_h), interpolation=cv2.INTER_NEAREST)
    return out_img, out_mask


def rotated_dims(w: int, h: int, angle_deg: float) -> tuple[int, int]:
    """Tight bounding box of a w x h rectangle rotated by angle_deg."""
    theta = math.radians(angle_deg)
    c, s = abs(math.cos(theta)), abs(math.sin(theta))
    return math.ceil(w * c + h * s), math.ceil(w * s + h * c)


def rotate(image: np.ndarray, mask: np.ndarray, angle_deg: float) -> tuple[np.ndarray, np.ndarray]:
    """Rotate about the patch center onto an expanded canvas; fill is alpha 0, mask 0."""
    if angle_deg == 0.0:
        return image.copy(), mask.copy()
    h, w = mask.shape
    new_w, new_h = rotated_dims(w, h, angle_deg)
    m = cv2.getRotationMatrix2D(((w - 1) / 2.0, (h - 1) / 2.0), angle_deg, 1.0)
    m[0, 2] += (new_w - w) / 2.0
    m[1, 2] += (new_h - h) / 2.0
    out_img = cv2.warpAffine(
        image, m, (new_w, new_h), flags=cv2.INTER_LINEAR,
        borderMode=cv2.BORDER_CONSTANT, borderValue=(0, 0, 0, 0),
    )
    out_mask = cv2.warpAffine(
        mask, m, (new_w, new_h), flags=cv2.INTER_NEAREST,
        borderMode=cv2.BORDER_CONSTANT, borderValue=0,
    )
    return out_img, out_mask


def corner_crop(image: np.ndarray, mask: np.ndarray, corner: str, ratio: float) -> tuple[np.ndarray, np.ndarray]:
    """Keep a ceil(W*ratio) x ceil(H*ratio) sub-rectangle anchored at the given corner."""
    if corner not in CORNERS:
        raise InvalidSpecError(f"unknown corner {corner!r}")
    if not 0.5 <= ratio <= 1.0:
        raise InvalidSpecError(f"crop ratio {ratio} outside [0.5, 1.0]")
    h, w = mask.shape
    cw, ch = math.ceil(w * ratio), math.ceil(h * ratio)
    y0 = 0 if corner in ("TL", "TR") else h - ch
    x0 = 0 if corner in ("TL", "BL") else w - cw
    return image[y0 : y0 + ch, x0 : x0 + cw].copy(), mask[y0 : y0 + ch, x0 : x0 + cw].copy()


def darken(image: np.ndarray, mask: np.ndarray, factor: float) -> tuple[np.ndarray, np.ndarray]:
    """Scale RGB by factor (round-half-up); alpha and mask untouched."""
    if not 0.5 <= factor <= 1.0:
        raise InvalidSpecError(f"darken factor {factor} outside [0.5, 1.0]")
    if factor == 1.0:
        return image.copy(), mask.copy()
    out = image.copy()
    rgb = out[:, :, :3].astype(np.float64) * factor
    out[:, :, :3] = np.clip(np.floor(rgb + 0.5), 0, 255).astype(np.uint8)
    return out, mask.copy()


def degrade(image: np.ndarray, mask: np.ndarray, down_factor: float) -> tuple[np.ndarray, np.ndarray]:
    """Lose resolution: bilinear downscale then upscale back to the original dims."""
    if not 0.0 < down_factor < 1.0:
        raise InvalidSpecError(f"down_factor {down_factor} outside (0, 1)")
    h, w = mask.shape
    dw = max(1, math.floor(w * down_factor))
    dh = max(1, math.floor(h * down_factor))
    small = cv2.resize(image, (dw, dh), interpolation=cv2.INTER_LINEAR)
    out_img = cv2.resize(small, (w, h), interpolation=cv2.INTER_LINEAR)
    return out_img, mask.copy()


def apply(image: np.ndarray, mask: np.ndarray, params: TransformParams) -> tuple[np.ndarray, np.ndarray]:
    """Run the full chain: resize, rotate, optional crop, darken, optional degrade."""
    params.validate()
    image, mask = resize(image, mask, params.scale)
    image, mask = rotate(image, mask, params.angle_deg)
    if params.crop is not None:
        image, mask = corner_crop(image, mask, params.crop.corner, params.crop.ratio)
    image, mask = darken(image, mask, params.darken)
    if params.degrade is not None:
        image, mask = degrade(image, mask, params.degrade.down_factor)
    return image, mask


def transformed_dims(w: int, h: int, params: TransformParams) -> tuple[int, int]:
    """Output dims of apply() without touching pixels; used for paste placement."""
    if params.scale != 1.0:
        w = max(1, math.floor(w * params.scale))
        h = max(1, math.floor(h * params.scale))
    if params.angle_deg != 0.0:
        w, h = rotated_dims(w, h, params.angle_deg)
    if params.crop is not None:
        w = math.ceil(w * params.crop.ratio)
        h = math.ceil(h * params.crop.ratio)
    return w, h
