"""Learning-free code segmenter: gradient density + orientation anisotropy.

Deliberately simple — it exists so the generate/segment/evaluate loop runs
without any trained model. Windows with enough strong-gradient pixels become
code candidates; a window whose doubled-angle gradient histogram is strongly
anisotropic (one dominant bar direction) votes barcode, otherwise QR. The
candidate map is cleaned with a morphological close-then-open and each
connected region takes the majority class of its window votes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import cv2
import numpy as np

from .errors import SegmenterError
from .patches import CLASS_BARCODE, CLASS_QRCODE

EDGE_MAG_THRESHOLD = 40.0


@dataclass(frozen=True)
class BaselineParams:
    window_px: int = 16
    grad_density_threshold: float = 0.15
    anisotropy_threshold: float = 0.6
    morph_radius_px: int = 3

    def validate(self) -> "BaselineParams":
        if self.window_px < 1 or self.morph_radius_px < 1:
            raise SegmenterError("window_px and morph_radius_px must be positive")
        for name in ("grad_density_threshold", "anisotropy_threshold"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise SegmenterError(f"{name} must lie in (0, 1), got {v}")
        return self


def segment(image: np.ndarray, params: BaselineParams = BaselineParams()) -> np.ndarray:
    """Predict a {0,1,2} label mask for an RGB image."""
    params.validate()
    if image.ndim != 3 or image.shape[2] != 3:
        raise SegmenterError(f"expected an RGB image, got shape {image.shape}")
    h, w = image.shape[:2]
    win = params.window_px
    if h < win or w < win:
        raise SegmenterError(f"image {w}x{h} smaller than window {win}")

    gray = cv2.cvtColor(image, cv2.COLOR_RGB2GRAY).astype(np.float32)
    gx = cv2.Sobel(gray, cv2.CV_32F, 1, 0, ksize=3)
    gy = cv2.Sobel(gray, cv2.CV_32F, 0, 1, ksize=3)
    mag = np.hypot(gx, gy)
    strong = mag >= EDGE_MAG_THRESHOLD
    # Doubled-angle unit vectors make opposite gradient directions (two sides
    # of the same bar) reinforce instead of cancel.
    theta2 = 2.0 * np.arctan2(gy, gx)
    cos2 = np.where(strong, mag * np.cos(theta2), 0.0)
    sin2 = np.where(strong, mag * np.sin(theta2), 0.0)
    wmag = np.where(strong, mag, 0.0)

    ny = math.ceil(h / win)
    nx = math.ceil(w / win)
    votes = np.zeros((ny, nx), dtype=np.uint8)
    for by in range(ny):
        for bx in range(nx):
            y0, x0 = by * win, bx * win
            y1, x1 = min(y0 + win, h), min(x0 + win, w)
            area = (y1 - y0) * (x1 - x0)
            s = strong[y0:y1, x0:x1]
            if s.sum() / area < params.grad_density_threshold:
                continue
            total = wmag[y0:y1, x0:x1].sum()
            coher = math.hypot(cos2[y0:y1, x0:x1].sum(), sin2[y0:y1, x0:x1].sum()) / total
            votes[by, bx] = CLASS_BARCODE if coher >= params.anisotropy_threshold else CLASS_QRCODE

    vote_map = votes.repeat(win, axis=0).repeat(win, axis=1)[:h, :w]
    candidate = (vote_map > 0).astype(np.uint8)
    r = params.morph_radius_px
    kernel = cv2.getStructuringElement(cv2.MORPH_ELLIPSE, (2 * r + 1, 2 * r + 1))
    cleaned = cv2.morphologyEx(candidate, cv2.MORPH_CLOSE, kernel)
    cleaned = cv2.morphologyEx(cleaned, cv2.MORPH_OPEN, kernel)

    out = np.zeros((h, w), dtype=np.uint8)
    n_comp, comp = cv2.connectedComponents(cleaned, connectivity=8)
    for c in range(1, n_comp):
        region = comp == c
        region_votes = vote_map[region]
        n_bar = int((region_votes == CLASS_BARCODE).sum())
        n_qr = int((region_votes == CLASS_QRCODE).sum())
        out[region] = CLASS_BARCODE if n_bar >= n_qr else CLASS_QRCODE
    return out
