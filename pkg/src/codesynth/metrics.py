"""Segmentation metrics: confusion matrix, per-class IoU, mIoU, mean accuracy, FPS.

Means are unweighted over the classes that appear in prediction or ground
truth (including background); classes absent from both are undefined and
excluded. counts[g][p] = number of pixels with ground truth g predicted p.
"""

from __future__ import annotations

import math
import time

import numpy as np

from .errors import EvaluationError
from .patches import CLASS_NAMES


class ConfusionMatrix:
    def __init__(self, num_classes: int = 3, counts: np.ndarray | None = None):
        self.num_classes = num_classes
        if counts is None:
            counts = np.zeros((num_classes, num_classes), dtype=np.int64)
        else:
            counts = np.asarray(counts, dtype=np.int64)
            if counts.shape != (num_classes, num_classes):
                raise EvaluationError(f"counts shape {counts.shape} != ({num_classes},{num_classes})")
            if (counts < 0).any():
                raise EvaluationError("confusion counts must be non-negative")
        self.counts = counts

    def accumulate(self, pred: np.ndarray, gt: np.ndarray) -> "ConfusionMatrix":
        pred = np.asarray(pred)
        gt = np.asarray(gt)
        if pred.shape != gt.shape:
            raise EvaluationError(f"pred shape {pred.shape} != gt shape {gt.shape}")
        n = self.num_classes
        if pred.size:
            p = pred.reshape(-1).astype(np.int64)
            g = gt.reshape(-1).astype(np.int64)
            if p.min() < 0 or p.max() >= n:
                raise EvaluationError(f"prediction values outside [0, {n})")
            if g.min() < 0 or g.max() >= n:
                raise EvaluationError(f"ground-truth values outside [0, {n})")
            self.counts += np.bincount(g * n + p, minlength=n * n).reshape(n, n)
        return self

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if other.num_classes != self.num_classes:
            raise EvaluationError("cannot merge confusion matrices of different sizes")
        return ConfusionMatrix(self.num_classes, self.counts + other.counts)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, ConfusionMatrix)
            and other.num_classes == self.num_classes
            and bool((other.counts == self.counts).all())
        )

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def iou_per_class(self) -> np.ndarray:
        """IoU per class; NaN where the class is absent from both pred and gt."""
        diag = np.diag(self.counts).astype(np.float64)
        denom = self.counts.sum(axis=1) + self.counts.sum(axis=0) - np.diag(self.counts)
        with np.errstate(invalid="ignore"):
            return np.where(denom > 0, diag / np.where(denom > 0, denom, 1), np.nan)

    def acc_per_class(self) -> np.ndarray:
        """Per-class recall; NaN where the class never occurs in ground truth."""
        diag = np.diag(self.counts).astype(np.float64)
        row = self.counts.sum(axis=1)
        with np.errstate(invalid="ignore"):
            return np.where(row > 0, diag / np.where(row > 0, row, 1), np.nan)

    def mean_iou(self) -> float:
        ious = self.iou_per_class()
        if np.isnan(ious).all():
            raise EvaluationError("mIoU undefined: no class present in pred or gt")
        return float(np.nanmean(ious))

    def mean_acc(self) -> float:
        accs = self.acc_per_class()
        if np.isnan(accs).all():
            raise EvaluationError("mean accuracy undefined: empty ground truth")
        return float(np.nanmean(accs))

    def pixel_acc(self) -> float:
        if self.total == 0:
            raise EvaluationError("pixel accuracy undefined: no pixels accumulated")
        return float(np.trace(self.counts) / self.total)

    def report(self) -> dict:
        """JSON-friendly metric summary; undefined per-class values become null."""
        def clean(values: np.ndarray) -> list:
            return [None if math.isnan(v) else float(v) for v in values]

        names = list(CLASS_NAMES[: self.num_classes])
        return {
            "class_names": names,
            "per_class_iou": clean(self.iou_per_class()),
            "per_class_acc": clean(self.acc_per_class()),
            "miou": self.mean_iou(),
            "mean_acc": self.mean_acc(),
            "pixel_acc": self.pixel_acc(),
            "total_pixels": self.total,
            "confusion": self.counts.tolist(),
        }


def fps_benchmark(segmenter, images: list[np.ndarray], warmup: int = 1) -> dict:
    """Time single-image segmenter calls; warmup calls run first and are discarded."""
    if not images:
        raise EvaluationError("fps benchmark needs at least one image")
    for img in images[: max(warmup, 0)]:
        segmenter(img)
    times = []
    for img in images:
        t0 = time.perf_counter()
        segmenter(img)
        times.append(time.perf_counter() - t0)
    mean_t = float(np.mean(times))
    return {
        "fps": 1.0 / mean_t if mean_t > 0 else float("inf"),
        "time_mean_s": mean_t,
        "time_std_s": float(np.std(times)),
        "n_images": len(images),
        "warmup": warmup,
    }
