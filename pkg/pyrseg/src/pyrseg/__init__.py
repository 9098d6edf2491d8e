"""Dual-pyramid segmentation network, trainer, and ablation harness."""

from .errors import (
    DataError,
    EvalError,
    ModelConfigError,
    PyrsegError,
    TrainingError,
)
from .model import NetConfig, build_model, summary
from .trainer import TrainConfig, load_checkpoint, train
from .evaluate import evaluate, predict_mask

__version__ = "0.1.0"

__all__ = [
    "DataError",
    "EvalError",
    "ModelConfigError",
    "NetConfig",
    "PyrsegError",
    "TrainConfig",
    "TrainingError",
    "build_model",
    "evaluate",
    "load_checkpoint",
    "predict_mask",
    "summary",
    "train",
    "__version__",
]
