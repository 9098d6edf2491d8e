"""Run configuration: JSON schema with sections {sampler, transforms, patchgen, dataset}.

Parsing is strict: unknown keys, wrong types, or out-of-range values raise
ConfigError naming the offending field path before any work starts. The parsed
config round-trips through to_dict() and is embedded verbatim in the dataset
manifest as config_snapshot.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, InvalidSpecError
from .patches import (
    CLASS_BARCODE,
    CLASS_NAMES,
    CLASS_QRCODE,
    BarcodeSpec,
    PatchAsset,
    QrSpec,
    gen_barcode_patch,
    gen_qr_patch,
    ingest_patch,
)
from .sampler import SamplerConfig
from .transforms import TransformRanges


def _check_keys(d: dict, allowed: set[str], path: str) -> None:
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"{path}: unknown keys {sorted(extra)}")


def _num(d: dict, key: str, default, path: str) -> float:
    v = d.get(key, default)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number, got {type(v).__name__}")
    return v


def _int(d: dict, key: str, default, path: str) -> int:
    v = d.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{path}.{key}: expected an integer, got {type(v).__name__}")
    return v


def _pair(d: dict, key: str, default: tuple[float, float], path: str) -> tuple[float, float]:
    v = d.get(key, list(default))
    if not (isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)):
        raise ConfigError(f"{path}.{key}: expected [lo, hi]")
    return float(v[0]), float(v[1])


@dataclass(frozen=True)
class BarcodeGroup:
    count: int = 1
    width_px: int = 120
    height_px: int = 60
    module_count: int = 30
    quiet_zone_px: int = 8

    def spec(self) -> BarcodeSpec:
        return BarcodeSpec(self.width_px, self.height_px, self.module_count, self.quiet_zone_px)


@dataclass(frozen=True)
class QrGroup:
    count: int = 1
    modules_per_side: int = 21
    module_px: int = 4
    quiet_zone_px: int = 8

    def spec(self) -> QrSpec:
        return QrSpec(self.modules_per_side, self.module_px, self.quiet_zone_px)


@dataclass(frozen=True)
class IngestEntry:
    image: str
    mask: str
    class_name: str
    id: str | None = None


@dataclass(frozen=True)
class PatchGenConfig:
    barcode: tuple[BarcodeGroup, ...] = (BarcodeGroup(count=4),)
    qr: tuple[QrGroup, ...] = (QrGroup(count=4),)
    ingest: tuple[IngestEntry, ...] = ()


@dataclass(frozen=True)
class DatasetOptions:
    scenes_per_background: int = 15
    colorize: bool = False


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    transforms: TransformRanges = field(default_factory=TransformRanges)
    patchgen: PatchGenConfig = field(default_factory=PatchGenConfig)
    dataset: DatasetOptions = field(default_factory=DatasetOptions)

    @staticmethod
    def from_dict(d: dict) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError(f"config root: expected an object, got {type(d).__name__}")
        _check_keys(d, {"seed", "sampler", "transforms", "patchgen", "dataset"}, "config")

        seed = _int(d, "seed", 0, "config")
        if seed < 0:
            raise ConfigError(f"config.seed: must be >= 0, got {seed}")

        s = d.get("sampler", {})
        if not isinstance(s, dict):
            raise ConfigError("config.sampler: expected an object")
        _check_keys(s, {"lambda", "p_single", "t_min", "t_max", "max_pastes"}, "config.sampler")
        sampler = SamplerConfig(
            lam=float(_num(s, "lambda", 2.0, "config.sampler")),
            p_single=float(_num(s, "p_single", 0.5, "config.sampler")),
            t_min=_int(s, "t_min", 2, "config.sampler"),
            t_max=_int(s, "t_max", 5, "config.sampler"),
            max_pastes=_int(s, "max_pastes", 9, "config.sampler"),
        )

        t = d.get("transforms", {})
        if not isinstance(t, dict):
            raise ConfigError("config.transforms: expected an object")
        _check_keys(
            t,
            {"scale", "angle_deg", "crop_prob", "crop_ratio", "darken", "degrade_prob", "down_factor"},
            "config.transforms",
        )
        ranges = TransformRanges(
            scale=_pair(t, "scale", (0.2, 5.0), "config.transforms"),
            angle_deg=_pair(t, "angle_deg", (-45.0, 45.0), "config.transforms"),
            crop_prob=float(_num(t, "crop_prob", 0.1, "config.transforms")),
            crop_ratio=_pair(t, "crop_ratio", (0.5, 1.0), "config.transforms"),
            darken=_pair(t, "darken", (0.5, 1.0), "config.transforms"),
            degrade_prob=float(_num(t, "degrade_prob", 0.5, "config.transforms")),
            down_factor=_pair(t, "down_factor", (0.3, 0.8), "config.transforms"),
        )

        p = d.get("patchgen", {})
        if not isinstance(p, dict):
            raise ConfigError("config.patchgen: expected an object")
        _check_keys(p, {"barcode", "qr", "ingest"}, "config.patchgen")
        barcode = []
        for i, g in enumerate(p.get("barcode", [{"count": 4}])):
            path = f"config.patchgen.barcode[{i}]"
            if not isinstance(g, dict):
                raise ConfigError(f"{path}: expected an object")
            _check_keys(g, {"count", "width_px", "height_px", "module_count", "quiet_zone_px"}, path)
            barcode.append(
                BarcodeGroup(
                    count=_int(g, "count", 1, path),
                    width_px=_int(g, "width_px", 120, path),
                    height_px=_int(g, "height_px", 60, path),
                    module_count=_int(g, "module_count", 30, path),
                    quiet_zone_px=_int(g, "quiet_zone_px", 8, path),
                )
            )
        qr = []
        for i, g in enumerate(p.get("qr", [{"count": 4}])):
            path = f"config.patchgen.qr[{i}]"
            if not isinstance(g, dict):
                raise ConfigError(f"{path}: expected an object")
            _check_keys(g, {"count", "modules_per_side", "module_px", "quiet_zone_px"}, path)
            qr.append(
                QrGroup(
                    count=_int(g, "count", 1, path),
                    modules_per_side=_int(g, "modules_per_side", 21, path),
                    module_px=_int(g, "module_px", 4, path),
                    quiet_zone_px=_int(g, "quiet_zone_px", 8, path),
                )
            )
        ingest = []
        for i, g in enumerate(p.get("ingest", [])):
            path = f"config.patchgen.ingest[{i}]"
            if not isinstance(g, dict):
                raise ConfigError(f"{path}: expected an object")
            _check_keys(g, {"image", "mask", "class", "id"}, path)
            for key in ("image", "mask", "class"):
                if not isinstance(g.get(key), str):
                    raise ConfigError(f"{path}.{key}: expected a string")
            if g["class"] not in CLASS_NAMES[1:]:
                raise ConfigError(f"{path}.class: expected one of {list(CLASS_NAMES[1:])}")
            ingest.append(IngestEntry(g["image"], g["mask"], g["class"], g.get("id")))

        ds = d.get("dataset", {})
        if not isinstance(ds, dict):
            raise ConfigError("config.dataset: expected an object")
        _check_keys(ds, {"scenes_per_background", "colorize"}, "config.dataset")
        colorize = ds.get("colorize", False)
        if not isinstance(colorize, bool):
            raise ConfigError("config.dataset.colorize: expected a boolean")
        dataset = DatasetOptions(
            scenes_per_background=_int(ds, "scenes_per_background", 15, "config.dataset"),
            colorize=colorize,
        )
        if dataset.scenes_per_background < 1:
            raise ConfigError("config.dataset.scenes_per_background: must be >= 1")

        cfg = RunConfig(seed, sampler, ranges, PatchGenConfig(tuple(barcode), tuple(qr), tuple(ingest)), dataset)
        try:
            cfg.sampler.validate()
            cfg.transforms.validate()
        except InvalidSpecError as e:
            raise ConfigError(str(e)) from e
        return cfg

    @staticmethod
    def from_file(path: str | Path) -> "RunConfig":
        try:
            with open(path) as f:
                d = json.load(f)
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"config {path} is not valid JSON: {e}") from e
        return RunConfig.from_dict(d)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "sampler": {
                "lambda": self.sampler.lam,
                "p_single": self.sampler.p_single,
                "t_min": self.sampler.t_min,
                "t_max": self.sampler.t_max,
                "max_pastes": self.sampler.max_pastes,
            },
            "transforms": {
                "scale": list(self.transforms.scale),
                "angle_deg": list(self.transforms.angle_deg),
                "crop_prob": self.transforms.crop_prob,
                "crop_ratio": list(self.transforms.crop_ratio),
                "darken": list(self.transforms.darken),
                "degrade_prob": self.transforms.degrade_prob,
                "down_factor": list(self.transforms.down_factor),
            },
            "patchgen": {
                "barcode": [vars(g).copy() for g in self.patchgen.barcode],
                "qr": [vars(g).copy() for g in self.patchgen.qr],
                "ingest": [
                    {"image": e.image, "mask": e.mask, "class": e.class_name, "id": e.id}
                    for e in self.patchgen.ingest
                ],
            },
            "dataset": {
                "scenes_per_background": self.dataset.scenes_per_background,
                "colorize": self.dataset.colorize,
            },
        }


def patch_seed(global_seed: int, patch_id: str) -> int:
    """Stable per-patch seed: global seed xor CRC32 of the patch id."""
    return global_seed ^ zlib.crc32(patch_id.encode())


def generate_assets(cfg: PatchGenConfig, seed: int, base_dir: str | Path = ".") -> list[PatchAsset]:
    """Materialize every configured patch; ids are barcode_NNN / qr_NNN / ingest stems."""
    assets: list[PatchAsset] = []
    i = 0
    for g in cfg.barcode:
        for _ in range(g.count):
            pid = f"barcode_{i:03d}"
            assets.append(gen_barcode_patch(patch_seed(seed, pid), g.spec(), pid))
            i += 1
    i = 0
    for g in cfg.qr:
        for _ in range(g.count):
            pid = f"qr_{i:03d}"
            assets.append(gen_qr_patch(patch_seed(seed, pid), g.spec(), pid))
            i += 1
    base = Path(base_dir)
    for e in cfg.ingest:
        class_id = CLASS_BARCODE if e.class_name == "barcode" else CLASS_QRCODE
        assets.append(ingest_patch(base / e.image, base / e.mask, class_id, e.id))
    return assets
