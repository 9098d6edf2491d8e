import math

import numpy as np
import pytest

from codesynth import transforms
from codesynth.errors import InvalidSpecError
from codesynth.patches import BarcodeSpec, gen_barcode_patch
from codesynth.transforms import (
    CropParams,
    DegradeParams,
    TransformParams,
    TransformRanges,
    sample_params,
)


def _patch(w=100, h=60, seed=0):
    rng = np.random.default_rng(seed)
    img = rng.integers(0, 256, size=(h, w, 4), dtype=np.uint8)
    img[:, :, 3] = 255
    mask = np.zeros((h, w), dtype=np.uint8)
    mask[h // 4 : 3 * h // 4, w // 4 : 3 * w // 4] = 1
    return img, mask


def test_resize_identity_exact():
    img, mask = _patch()
    out_img, out_mask = transforms.resize(img, mask, 1.0)
    assert (out_img == img).all() and (out_mask == mask).all()
    assert out_img is not img  # copies, not views


def test_resize_floor_rule():
    img, mask = _patch(100, 60)
    out_img, out_mask = transforms.resize(img, mask, 0.5)
    assert out_mask.shape == (30, 50)
    assert out_img.shape == (30, 50, 4)


def test_resize_clamps_to_one_pixel():
    img, mask = _patch(10, 10)
    mask[:] = 1
    out_img, out_mask = transforms.resize(img, mask, 0.05)
    # oracle: floor(10 * 0.05) = 0, clamped to 1
    assert out_mask.shape == (1, 1)


def test_resize_mask_stays_binary():
    img, mask = _patch()
    for ratio in (0.3, 0.77, 2.5, 4.99):
        _, out_mask = transforms.resize(img, mask, ratio)
        assert np.isin(out_mask, (0, 1)).all()


def test_rotate_identity_exact():
    img, mask = _patch()
    out_img, out_mask = transforms.rotate(img, mask, 0.0)
    assert (out_img == img).all() and (out_mask == mask).all()


def test_rotate_bounding_box_formula():
    img, mask = _patch(100, 100)
    out_img, out_mask = transforms.rotate(img, mask, 45.0)
    # oracle: ceil(100*cos45 + 100*sin45) = ceil(141.42...) = 142
    assert out_mask.shape == (142, 142)
    for w, h, ang in [(100, 60, 30.0), (37, 91, -12.5), (64, 64, 44.0)]:
        theta = math.radians(ang)
        ew = math.ceil(w * abs(math.cos(theta)) + h * abs(math.sin(theta)))
        eh = math.ceil(w * abs(math.sin(theta)) + h * abs(math.cos(theta)))
        i2, m2 = transforms.rotate(*_patch(w, h), ang)
        assert m2.shape == (eh, ew)
        assert i2.shape == (eh, ew, 4)


def test_rotate_fill_is_transparent_and_unmasked():
    img, mask = _patch(100, 100)
    out_img, out_mask = transforms.rotate(img, mask, 45.0)
    assert out_img[0, 0, 3] == 0  # corner is outside the rotated square
    assert out_mask[0, 0] == 0


def _bruteforce_rotate_mask(mask, angle_deg):
    """Independent nearest-neighbor rotation: inverse-map every output pixel."""
    h, w = mask.shape
    theta = math.radians(angle_deg)
    nw = math.ceil(w * abs(math.cos(theta)) + h * abs(math.sin(theta)))
    nh = math.ceil(w * abs(math.sin(theta)) + h * abs(math.cos(theta)))
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    ncx, ncy = cx + (nw - w) / 2.0, cy + (nh - h) / 2.0
    out = np.zeros((nh, nw), dtype=np.uint8)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    for y in range(nh):
        for x in range(nw):
            dx, dy = x - ncx, y - ncy
            # inverse of a CCW rotation by theta in image coords (y down)
            sx = cos_t * dx - sin_t * dy + cx
            sy = sin_t * dx + cos_t * dy + cy
            ix, iy = round(sx), round(sy)
            if 0 <= ix < w and 0 <= iy < h:
                out[y, x] = mask[iy, ix]
    return out


def test_rotate_mask_close_to_bruteforce_oracle():
    _, mask = _patch(40, 30)
    ours = transforms.rotate(*_patch(40, 30), 25.0)[1]
    oracle = _bruteforce_rotate_mask(mask, 25.0)
    assert ours.shape == oracle.shape
    # interpolation conventions may differ along edges by a hair
    assert abs(int(ours.sum()) - int(oracle.sum())) <= 0.05 * oracle.sum()


def test_rotate_roundtrip_foreground_conservation():
    img, mask = _patch(100, 60)
    i1, m1 = transforms.rotate(img, mask, 30.0)
    i2, m2 = transforms.rotate(i1, m1, -30.0)
    assert abs(int(m2.sum()) - int(mask.sum())) <= 0.05 * mask.sum()


def test_corner_crop_examples():
    img, mask = _patch(100, 60)
    out_img, out_mask = transforms.corner_crop(img, mask, "TL", 1.0)
    assert (out_img == img).all()
    out_img, out_mask = transforms.corner_crop(img, mask, "TL", 0.5)
    assert out_mask.shape == (30, 50)
    assert (out_img == img[:30, :50]).all()


def test_corner_crop_ceil_rule_br():
    img, mask = _patch(99, 59)
    out_img, out_mask = transforms.corner_crop(img, mask, "BR", 0.5)
    # oracle: ceil(99*.5)=50, ceil(59*.5)=30, anchored bottom-right
    assert out_mask.shape == (30, 50)
    assert (out_img == img[59 - 30 :, 99 - 50 :]).all()


@pytest.mark.parametrize("corner", ["TL", "TR", "BL", "BR"])
def test_corner_crop_anchors(corner):
    img, mask = _patch(40, 20)
    marker = {"TL": (0, 0), "TR": (0, 39), "BL": (19, 0), "BR": (19, 39)}[corner]
    img[marker[0], marker[1], :3] = (1, 2, 3)
    out_img, _ = transforms.corner_crop(img, mask, corner, 0.5)
    ey = 0 if corner in ("TL", "TR") else out_img.shape[0] - 1
    ex = 0 if corner in ("TL", "BL") else out_img.shape[1] - 1
    assert tuple(out_img[ey, ex, :3]) == (1, 2, 3)


def test_corner_crop_rejects_bad_args():
    img, mask = _patch()
    with pytest.raises(InvalidSpecError):
        transforms.corner_crop(img, mask, "XX", 0.8)
    with pytest.raises(InvalidSpecError):
        transforms.corner_crop(img, mask, "TL", 0.4)


def test_darken_arithmetic():
    img = np.zeros((2, 2, 4), dtype=np.uint8)
    img[:, :, :3] = (200, 100, 50)
    img[:, :, 3] = 255
    mask = np.ones((2, 2), dtype=np.uint8)
    out_img, out_mask = transforms.darken(img, mask, 0.5)
    assert tuple(out_img[0, 0, :3]) == (100, 50, 25)
    assert out_img[0, 0, 3] == 255
    assert (out_mask == mask).all()


def test_darken_identity_exact():
    img, mask = _patch()
    out_img, _ = transforms.darken(img, mask, 1.0)
    assert (out_img == img).all()


def test_degrade_preserves_dims_and_mask():
    img, mask = _patch(73, 41)
    for f in (0.3, 0.55, 0.8):
        out_img, out_mask = transforms.degrade(img, mask, f)
        assert out_img.shape == img.shape
        assert (out_mask == mask).all()


def test_degrade_near_identity_bound():
    # smooth ramp: bilinear resampling reproduces linear signals almost exactly
    w, h = 64, 64
    ramp = np.linspace(0, 255, w).astype(np.uint8)
    img = np.zeros((h, w, 4), dtype=np.uint8)
    img[:, :, :3] = ramp[None, :, None]
    img[:, :, 3] = 255
    mask = np.ones((h, w), dtype=np.uint8)
    out_img, _ = transforms.degrade(img, mask, 0.99)
    diff = np.abs(out_img[:, :, :3].astype(int) - img[:, :, :3].astype(int))
    assert diff.max() <= 2


def test_degrade_lowpass_on_checkerboard():
    w = h = 64
    yy, xx = np.mgrid[0:h, 0:w]
    board = ((xx + yy) % 2 * 255).astype(np.uint8)
    img = np.dstack([board, board, board, np.full((h, w), 255, np.uint8)])
    mask = np.ones((h, w), dtype=np.uint8)
    out_img, _ = transforms.degrade(img, mask, 0.3)
    assert out_img[:, :, 0].astype(np.float64).var() < board.astype(np.float64).var()


def test_apply_identity_exact():
    a = gen_barcode_patch(0, BarcodeSpec(120, 60, 30, 8))
    params = TransformParams(1.0, 0.0, None, 1.0, None)
    out_img, out_mask = transforms.apply(a.image, a.mask, params)
    assert (out_img == a.image).all() and (out_mask == a.mask).all()


def test_apply_chain_binary_and_dims_consistent():
    img, mask = _patch(80, 50)
    rng = np.random.default_rng(42)
    for _ in range(50):
        params = sample_params(rng)
        out_img, out_mask = transforms.apply(img, mask, params)
        assert out_img.shape[:2] == out_mask.shape
        assert np.isin(out_mask, (0, 1)).all()
        assert transforms.transformed_dims(80, 50, params) == (out_mask.shape[1], out_mask.shape[0])


def test_apply_deterministic_under_fixed_params():
    img, mask = _patch()
    params = TransformParams(1.7, -22.0, CropParams("BL", 0.75), 0.6, DegradeParams(0.5))
    a = transforms.apply(img, mask, params)
    b = transforms.apply(img, mask, params)
    assert (a[0] == b[0]).all() and (a[1] == b[1]).all()


def test_params_validate_ranges():
    with pytest.raises(InvalidSpecError):
        TransformParams(0.1, 0.0, None, 1.0, None).validate()
    with pytest.raises(InvalidSpecError):
        TransformParams(1.0, 50.0, None, 1.0, None).validate()
    with pytest.raises(InvalidSpecError):
        TransformParams(1.0, 0.0, CropParams("TL", 0.3), 1.0, None).validate()
    with pytest.raises(InvalidSpecError):
        TransformParams(1.0, 0.0, None, 0.4, None).validate()
    with pytest.raises(InvalidSpecError):
        TransformParams(1.0, 0.0, None, 1.0, DegradeParams(1.5)).validate()


def test_sample_params_ranges_and_frequencies():
    rng = np.random.default_rng(123)
    n = 100_000
    crops = degrades = 0
    for _ in range(n):
        p = sample_params(rng)
        assert 0.2 <= p.scale <= 5.0
        assert -45.0 <= p.angle_deg <= 45.0
        assert 0.5 <= p.darken <= 1.0
        if p.crop is not None:
            crops += 1
            assert p.crop.corner in transforms.CORNERS
            assert 0.5 <= p.crop.ratio <= 1.0
        if p.degrade is not None:
            degrades += 1
            assert 0.3 <= p.degrade.down_factor <= 0.8
    assert abs(crops / n - 0.1) <= 0.01
    assert abs(degrades / n - 0.5) <= 0.01


def test_sample_params_deterministic():
    a = [sample_params(np.random.default_rng(5)) for _ in range(10)]
    b = [sample_params(np.random.default_rng(5)) for _ in range(10)]
    assert a == b


def test_ranges_validation():
    with pytest.raises(InvalidSpecError):
        TransformRanges(scale=(2.0, 1.0)).validate()
    with pytest.raises(InvalidSpecError):
        TransformRanges(crop_prob=1.5).validate()
