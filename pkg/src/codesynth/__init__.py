"""codesynth: deterministic barcode/QR scene synthesis with pixel labels, plus evaluation tooling."""

from .errors import (
    CodesynthError,
    ConfigError,
    DatasetError,
    EvaluationError,
    IngestError,
    InvalidSpecError,
    RenderError,
    SegmenterError,
)
from .metrics import ConfusionMatrix, fps_benchmark
from .patches import (
    CLASS_BACKGROUND,
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
from .sampler import PastePlan, SamplerConfig, ScenePlan, plan_scene
from .transforms import TransformParams, TransformRanges

__version__ = "0.1.0"

__all__ = [
    "BarcodeSpec",
    "CLASS_BACKGROUND",
    "CLASS_BARCODE",
    "CLASS_NAMES",
    "CLASS_QRCODE",
    "CodesynthError",
    "ConfigError",
    "ConfusionMatrix",
    "DatasetError",
    "EvaluationError",
    "IngestError",
    "InvalidSpecError",
    "PastePlan",
    "PatchAsset",
    "QrSpec",
    "RenderError",
    "SamplerConfig",
    "ScenePlan",
    "SegmenterError",
    "TransformParams",
    "TransformRanges",
    "fps_benchmark",
    "gen_barcode_patch",
    "gen_qr_patch",
    "ingest_patch",
    "plan_scene",
    "__version__",
]
