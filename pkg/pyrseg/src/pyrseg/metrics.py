"""Confusion-matrix segmentation metrics (IoU / accuracy family)."""

import numpy as np

from .errors import EvalError


def new_counts(num_classes: int) -> np.ndarray:
    return np.zeros((num_classes, num_classes), dtype=np.int64)


def confusion_update(counts: np.ndarray, pred: np.ndarray, gt: np.ndarray) -> np.ndarray:
    """Accumulate counts[gt][pred] over one prediction/ground-truth pair."""
    n = counts.shape[0]
    if pred.shape != gt.shape:
        raise EvalError(f"shape mismatch: pred {pred.shape} vs gt {gt.shape}")
    p = pred.reshape(-1).astype(np.int64)
    g = gt.reshape(-1).astype(np.int64)
    if p.size and (p.min() < 0 or p.max() >= n or g.min() < 0 or g.max() >= n):
        raise EvalError(f"class ids outside [0, {n})")
    counts += np.bincount(g * n + p, minlength=n * n).reshape(n, n)
    return counts


def iou_per_class(counts: np.ndarray) -> np.ndarray:
    diag = np.diag(counts).astype(np.float64)
    union = counts.sum(axis=1) + counts.sum(axis=0) - np.diag(counts)
    with np.errstate(invalid="ignore"):
        return np.where(union > 0, diag / union, np.nan)


def acc_per_class(counts: np.ndarray) -> np.ndarray:
    diag = np.diag(counts).astype(np.float64)
    row = counts.sum(axis=1)
    with np.errstate(invalid="ignore"):
        return np.where(row > 0, diag / row, np.nan)


def metrics_report(counts: np.ndarray, class_names) -> dict:
    if counts.sum() == 0:
        raise EvalError("no pixels accumulated")
    iou = iou_per_class(counts)
    acc = acc_per_class(counts)
    total = int(counts.sum())
    return {
        "class_names": list(class_names),
        "per_class_iou": [None if np.isnan(v) else float(v) for v in iou],
        "per_class_acc": [None if np.isnan(v) else float(v) for v in acc],
        "miou": float(np.nanmean(iou)),
        "mean_acc": float(np.nanmean(acc)),
        "pixel_acc": float(np.diag(counts).sum() / total),
        "total_pixels": total,
        "confusion": counts.tolist(),
    }
