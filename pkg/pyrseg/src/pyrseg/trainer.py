"""SGD training loop with a stepped learning-rate schedule and JSONL logging."""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F

from .data import SegDataset
from .errors import TrainingError
from .metrics import confusion_update, iou_per_class, new_counts
from .model import NetConfig, build_model

DEFAULT_SCHEDULE = ((0, 1e-3), (50, 1e-4), (80, 1e-5))


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 90
    batch_size: int = 8
    momentum: float = 0.9
    weight_decay: float = 1e-3
    lr_schedule: tuple = DEFAULT_SCHEDULE
    seed: int = 0
    train_split: str = "train"
    val_split: str = "val"
    val_every: int = 1
    aux_weight: float = 0.4

    def validate(self) -> "TrainConfig":
        if self.epochs < 1:
            raise TrainingError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 2:
            # the coarsest pyramid branch batch-normalizes a single spatial
            # element per sample, so training needs at least two samples
            raise TrainingError(f"batch_size must be >= 2, got {self.batch_size}")
        if not 0.0 <= self.momentum < 1.0:
            raise TrainingError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.weight_decay < 0:
            raise TrainingError(f"weight_decay must be >= 0, got {self.weight_decay}")
        sched = tuple(self.lr_schedule)
        if not sched or sched[0][0] != 0:
            raise TrainingError("lr_schedule must start at epoch 0")
        starts = [s for s, _ in sched]
        if starts != sorted(set(starts)) or any(lr <= 0 for _, lr in sched):
            raise TrainingError(f"bad lr_schedule {sched}")
        if self.val_every < 0:
            raise TrainingError(f"val_every must be >= 0, got {self.val_every}")
        return self


def lr_at(schedule, epoch: int) -> float:
    lr = schedule[0][1]
    for start, value in schedule:
        if epoch >= start:
            lr = value
    return lr


def _batches(n: int, batch_size: int, rng: np.random.Generator):
    order = rng.permutation(n)
    for i in range(0, n, batch_size):
        yield order[i : i + batch_size]


def _loss(model, x, y, aux_weight: float):
    out = model(x)
    if isinstance(out, tuple):
        logits, aux = out
        return F.cross_entropy(logits, y) + aux_weight * F.cross_entropy(aux, y)
    return F.cross_entropy(out, y)


def _quick_val_miou(model, dataset) -> float:
    """Validation mIoU at model input resolution (monitoring only)."""
    counts = new_counts(dataset.num_classes)
    model.eval()
    with torch.no_grad():
        for i in range(len(dataset)):
            x, y = dataset[i]
            out = model(x[None])
            logits = out[0] if isinstance(out, tuple) else out
            pred = logits.argmax(dim=1)[0].numpy()
            confusion_update(counts, pred, y.numpy())
    model.train()
    return float(np.nanmean(iou_per_class(counts)))


def train(net_config: NetConfig, train_config: TrainConfig, manifest_path,
          out_dir, log_fn=None) -> dict:
    """Train a model; write checkpoint.pt and train_log.jsonl under out_dir.

    Returns {"model", "checkpoint_path", "log_path", "records",
    "iteration_losses"}. Aborts with a diagnostic if the loss stops being
    finite.
    """
    net_config.validate()
    train_config.validate()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    torch.manual_seed(train_config.seed)
    model = build_model(net_config)
    model.train()
    dataset = SegDataset(manifest_path, train_config.train_split, net_config.input_size)
    val_dataset = None
    if train_config.val_every > 0:
        val_dataset = SegDataset(manifest_path, train_config.val_split, net_config.input_size)
    optimizer = torch.optim.SGD(
        model.parameters(), lr=lr_at(train_config.lr_schedule, 0),
        momentum=train_config.momentum, weight_decay=train_config.weight_decay)

    records = []
    iteration_losses = []
    log_path = out_dir / "train_log.jsonl"
    with log_path.open("w") as log_file:
        for epoch in range(train_config.epochs):
            lr = lr_at(train_config.lr_schedule, epoch)
            for group in optimizer.param_groups:
                group["lr"] = lr
            rng = np.random.default_rng([train_config.seed, epoch])
            epoch_losses = []
            for it, idx in enumerate(_batches(len(dataset), train_config.batch_size, rng)):
                pairs = [dataset[int(i)] for i in idx]
                x = torch.stack([p[0] for p in pairs])
                y = torch.stack([p[1] for p in pairs])
                optimizer.zero_grad()
                loss = _loss(model, x, y, train_config.aux_weight)
                value = float(loss.detach())
                if not math.isfinite(value):
                    raise TrainingError(
                        f"non-finite loss {value} at epoch {epoch} iteration {it}; "
                        f"lr={lr}, batch ids={[dataset.entries[int(i)]['id'] for i in idx]}")
                loss.backward()
                optimizer.step()
                epoch_losses.append(value)
                iteration_losses.append(value)
            record = {"epoch": epoch, "lr": lr, "loss": float(np.mean(epoch_losses))}
            if val_dataset is not None and (epoch + 1) % train_config.val_every == 0:
                record["val_miou"] = _quick_val_miou(model, val_dataset)
            records.append(record)
            log_file.write(json.dumps(record) + "\n")
            log_file.flush()
            if log_fn is not None:
                log_fn(record)

    checkpoint_path = out_dir / "checkpoint.pt"
    torch.save({"net_config": net_config.to_dict(),
                "state_dict": model.state_dict()}, checkpoint_path)
    return {
        "model": model,
        "checkpoint_path": str(checkpoint_path),
        "log_path": str(log_path),
        "records": records,
        "iteration_losses": iteration_losses,
    }


def load_checkpoint(path):
    """Rebuild a model from checkpoint.pt; returns (model, net_config)."""
    try:
        blob = torch.load(path, map_location="cpu", weights_only=True)
    except (OSError, RuntimeError) as e:
        raise TrainingError(f"cannot load checkpoint {path}: {e}") from e
    if "net_config" not in blob or "state_dict" not in blob:
        raise TrainingError(f"checkpoint {path} missing net_config/state_dict")
    cfg_dict = dict(blob["net_config"])
    cfg_dict["pool_scales"] = tuple(cfg_dict["pool_scales"])
    config = NetConfig(**cfg_dict)
    model = build_model(config)
    model.load_state_dict(blob["state_dict"])
    model.eval()
    return model, config
