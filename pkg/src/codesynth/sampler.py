"""Scene planning: patch pool choice, paste count, per-paste params and placement.

The draw order below is part of the determinism contract and must not change:

  1. pool branch (one uniform draw against p_single)
  2. pool contents (single barcode patch, or T ~ U{t_min..t_max} distinct patches)
  3. paste count K (Poisson(lam) resampled until 1 <= K <= max_pastes)
  4. per paste, in order: pool index, transform params, center x, center y

Pastes are drawn from the pool with replacement, so the same patch can appear
several times in one scene. The paste center is sampled uniformly over the
background, then converted to a stored top-left position, so patches may
extend past the canvas and get clipped at composite time. z equals draw order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InvalidSpecError
from .patches import CLASS_BARCODE, PatchAsset
from .transforms import (
    DEFAULT_RANGES,
    TransformParams,
    TransformRanges,
    sample_params,
    transformed_dims,
)


@dataclass(frozen=True)
class SamplerConfig:
    lam: float = 2.0
    p_single: float = 0.5
    t_min: int = 2
    t_max: int = 5
    max_pastes: int = 9

    def validate(self) -> "SamplerConfig":
        if self.lam <= 0:
            raise InvalidSpecError(f"sampler.lam must be > 0, got {self.lam}")
        if not 0.0 <= self.p_single <= 1.0:
            raise InvalidSpecError(f"sampler.p_single {self.p_single} outside [0, 1]")
        if not 1 <= self.t_min <= self.t_max:
            raise InvalidSpecError(f"sampler t range [{self.t_min}, {self.t_max}] invalid")
        if not 1 <= self.max_pastes <= 9:
            raise InvalidSpecError(f"sampler.max_pastes {self.max_pastes} outside [1, 9]")
        return self


@dataclass(frozen=True)
class PastePlan:
    patch_id: str
    params: TransformParams
    x: int
    y: int
    z: int


@dataclass(frozen=True)
class ScenePlan:
    background_id: str
    width: int
    height: int
    pool: tuple[str, ...]
    pastes: tuple[PastePlan, ...]

    @property
    def single_pool(self) -> bool:
        return len(self.pool) == 1


def truncated_poisson_pmf(lam: float, lo: int = 1, hi: int = 9) -> dict[int, float]:
    """Exact pmf of Poisson(lam) conditioned on lo <= k <= hi."""
    raw = {k: math.exp(-lam) * lam**k / math.factorial(k) for k in range(lo, hi + 1)}
    z = sum(raw.values())
    return {k: p / z for k, p in raw.items()}


def sample_count(rng: np.random.Generator, cfg: SamplerConfig = SamplerConfig()) -> int:
    """Poisson(lam) resampled until the draw lands in [1, max_pastes]."""
    while True:
        k = int(rng.poisson(cfg.lam))
        if 1 <= k <= cfg.max_pastes:
            return k


def select_patch_pool(
    rng: np.random.Generator, assets: list[PatchAsset], cfg: SamplerConfig = SamplerConfig()
) -> tuple[str, ...]:
    """Either one barcode patch, or T distinct patches of any class."""
    if len(assets) < cfg.t_max:
        raise ConfigError(f"pool sampling needs >= t_max={cfg.t_max} assets, have {len(assets)}")
    if rng.random() < cfg.p_single:
        barcode_ids = [a.id for a in assets if a.class_id == CLASS_BARCODE]
        if not barcode_ids:
            raise ConfigError("single-patch pool needs at least one barcode asset")
        return (barcode_ids[int(rng.integers(len(barcode_ids)))],)
    t = int(rng.integers(cfg.t_min, cfg.t_max + 1))
    idx = rng.choice(len(assets), size=t, replace=False)
    return tuple(assets[int(i)].id for i in idx)


def plan_scene(
    rng: np.random.Generator,
    background_id: str,
    width: int,
    height: int,
    assets: list[PatchAsset],
    cfg: SamplerConfig = SamplerConfig(),
    ranges: TransformRanges = DEFAULT_RANGES,
) -> ScenePlan:
    """Plan one composite scene without touching any pixels."""
    cfg.validate()
    if width < 32 or height < 32:
        raise InvalidSpecError(f"background {width}x{height} below 32x32 minimum")
    dims = {a.id: (a.mask.shape[1], a.mask.shape[0]) for a in assets}
    pool = select_patch_pool(rng, assets, cfg)
    k = sample_count(rng, cfg)
    pastes = []
    for z in range(k):
        patch_id = pool[int(rng.integers(len(pool)))]
        params = sample_params(rng, ranges)
        cx = int(rng.integers(width))
        cy = int(rng.integers(height))
        tw, th = transformed_dims(*dims[patch_id], params)
        pastes.append(PastePlan(patch_id, params, cx - tw // 2, cy - th // 2, z))
    return ScenePlan(background_id, width, height, pool, tuple(pastes))
