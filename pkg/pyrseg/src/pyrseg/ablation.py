"""Ablation grids over the refinement branch, with JSON + aligned-text tables."""

import dataclasses
import json
from pathlib import Path

from .errors import PyrsegError
from .evaluate import evaluate
from .model import NetConfig
from .trainer import TrainConfig, train

COLUMNS = ("PRM feature", "Layers", "Mean Acc", "barcode IoU", "QR code IoU", "mIoU")

# (feature label, layers label, prm_source, prm_op)
TABLE2_ROWS = (
    ("Res5", "Encoder-Decoder", "res5", "encoder_decoder"),
    ("Res4", "Encoder-Decoder", "res4", "encoder_decoder"),
    ("Res3", "Encoder-Decoder", "res3", "encoder_decoder"),
    ("Res2", "Two Convs", "res2", "two_convs"),
    ("Res1", "Two Convs", "res1", "two_convs"),
)
TABLE3_ROWS = (
    ("Res1", "Maxpooling(s=4)", "res1", "maxpool_s4"),
    ("Res1", "Avgpooling(s=4)", "res1", "avgpool_s4"),
    ("Res1", "Two Convs(s=2)", "res1", "two_convs"),
)


def _grid(rows, base: NetConfig):
    out = []
    for feature, layers, source, op in rows:
        config = dataclasses.replace(base, p3m_prior=True, prm_source=source, prm_op=op)
        out.append((feature, layers, config))
    return out


def table2_grid(base: NetConfig):
    """Refinement source sweep: which backbone stage feeds the branch."""
    return _grid(TABLE2_ROWS, base)


def table3_grid(base: NetConfig):
    """Refinement op sweep on the shallowest source."""
    return _grid(TABLE3_ROWS, base)


def run_ablation(grid, manifest_path, train_config: TrainConfig,
                 out_dir, log_fn=None) -> dict:
    """Train and score every config in `grid`; failures become error rows.

    Returns {"columns": COLUMNS, "rows": [...]} where each row maps every
    column name to a value (labels as strings, metrics as floats or None).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for i, (feature, layers, config) in enumerate(grid):
        row = {"PRM feature": feature, "Layers": layers,
               "Mean Acc": None, "barcode IoU": None,
               "QR code IoU": None, "mIoU": None}
        run_dir = out_dir / f"run_{i:02d}"
        try:
            result = train(config, train_config, manifest_path, run_dir)
            report = evaluate(result["model"], manifest_path,
                              split=train_config.val_split)
            row["Mean Acc"] = report["mean_acc"]
            row["barcode IoU"] = report["per_class_iou"][1]
            row["QR code IoU"] = report["per_class_iou"][2]
            row["mIoU"] = report["miou"]
        except PyrsegError as e:
            row["error"] = str(e)
        rows.append(row)
        if log_fn is not None:
            log_fn(row)
    return {"columns": list(COLUMNS), "rows": rows}


def format_table(table: dict) -> str:
    """Render the table as aligned monospace text."""
    def cell(row, col):
        v = row.get(col)
        if v is None:
            return "-"
        return f"{v:.4f}" if isinstance(v, float) else str(v)

    grid = [list(table["columns"])]
    for row in table["rows"]:
        line = [cell(row, c) for c in table["columns"]]
        if "error" in row:
            line[-1] = f"error: {row['error']}"
        grid.append(line)
    widths = [max(len(r[j]) for r in grid) for j in range(len(grid[0]))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in grid]
    return "\n".join(lines) + "\n"


def write_table(table: dict, out_dir) -> dict:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / "ablation.json"
    text_path = out_dir / "ablation.txt"
    json_path.write_text(json.dumps(table, indent=2) + "\n")
    text_path.write_text(format_table(table))
    return {"json": str(json_path), "text": str(text_path)}
