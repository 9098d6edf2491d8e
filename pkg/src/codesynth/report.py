"""Report rendering: JSON + text + CSV files and matplotlib figures.

Every writer takes a plain dict (from metrics.ConfusionMatrix.report,
dataset_io.dataset_stats, or metrics.fps_benchmark) and materializes it
under a directory so results can be inspected without rerunning anything.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .sampler import truncated_poisson_pmf  # noqa: E402


def _dump_json(obj: dict, path: Path) -> None:
    with open(path, "w") as f:
        json.dump(obj, f, indent=2)
        f.write("\n")


def _fmt(v) -> str:
    if v is None:
        return "n/a"
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


def write_eval_report(report: dict, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _dump_json(report, out / "eval.json")

    names = report["class_names"]
    lines = ["class        IoU      Acc", "-" * 27]
    for name, iou, acc in zip(names, report["per_class_iou"], report["per_class_acc"]):
        lines.append(f"{name:<10} {_fmt(iou):>7}  {_fmt(acc):>7}")
    lines += [
        "-" * 27,
        f"mIoU       {report['miou']:.4f}",
        f"mean acc   {report['mean_acc']:.4f}",
        f"pixel acc  {report['pixel_acc']:.4f}",
        f"pixels     {report['total_pixels']}",
    ]
    if "fps" in report:
        lines.append(f"fps        {report['fps']:.2f}")
    (out / "eval.txt").write_text("\n".join(lines) + "\n")

    with open(out / "eval.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["class", "iou", "acc"])
        for name, iou, acc in zip(names, report["per_class_iou"], report["per_class_acc"]):
            w.writerow([name, "" if iou is None else f"{iou:.6f}", "" if acc is None else f"{acc:.6f}"])
        w.writerow(["mean", f"{report['miou']:.6f}", f"{report['mean_acc']:.6f}"])

    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    vals = [0.0 if v is None else v for v in report["per_class_iou"]]
    axes[0].bar(names, vals, color=["#777777", "#2a9d2a", "#d4b106"])
    axes[0].set_ylim(0, 1)
    axes[0].set_ylabel("IoU")
    axes[0].set_title(f"per-class IoU (mIoU {report['miou']:.3f})")
    cm = report["confusion"]
    im = axes[1].imshow(cm, cmap="Blues")
    axes[1].set_xticks(range(len(names)), names)
    axes[1].set_yticks(range(len(names)), names)
    axes[1].set_xlabel("predicted")
    axes[1].set_ylabel("ground truth")
    axes[1].set_title("confusion (pixels)")
    for i in range(len(names)):
        for j in range(len(names)):
            axes[1].text(j, i, str(cm[i][j]), ha="center", va="center", fontsize=8)
    fig.colorbar(im, ax=axes[1], fraction=0.046)
    fig.tight_layout()
    fig.savefig(out / "eval.png", dpi=120)
    plt.close(fig)


def write_stats_report(stats: dict, out_dir: str | Path, lam: float = 2.0) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _dump_json(stats, out / "stats.json")

    hist = stats["paste_count_histogram"]
    names = stats["class_names"]
    fractions = stats["per_class_pixel_fraction"]
    lines = [
        f"entries      {stats['n_entries']}",
        f"train/val    {stats['images_per_split']['train']}/{stats['images_per_split']['val']}",
        f"total pixels {stats['total_pixels']}",
        "",
        "class fractions:",
    ]
    for name, fr in zip(names, fractions):
        lines.append(f"  {name:<10} {fr:.4f}")
    lines += ["", "paste-count histogram:"]
    peak = max(hist.values()) or 1
    for k in sorted(hist, key=int):
        bar = "#" * math.ceil(40 * hist[k] / peak)
        lines.append(f"  {k}: {hist[k]:>6} {bar}")
    (out / "stats.txt").write_text("\n".join(lines) + "\n")

    with open(out / "stats.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["paste_count", "scenes"])
        for k in sorted(hist, key=int):
            w.writerow([k, hist[k]])

    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    ks = sorted(int(k) for k in hist)
    counts = [hist[k] if k in hist else hist[str(k)] for k in ks]
    n = sum(counts)
    axes[0].bar(ks, counts, label="observed")
    pmf = truncated_poisson_pmf(lam)
    axes[0].plot(list(pmf), [n * p for p in pmf.values()], "ro-", label=f"truncated Poisson({lam:g})")
    axes[0].set_xlabel("pastes per scene")
    axes[0].set_ylabel("scenes")
    axes[0].legend()
    axes[0].set_title("paste-count distribution")
    axes[1].bar(names, fractions, color=["#777777", "#2a9d2a", "#d4b106"])
    axes[1].set_ylabel("pixel fraction")
    axes[1].set_title("class pixel share")
    fig.tight_layout()
    fig.savefig(out / "stats.png", dpi=120)
    plt.close(fig)


def write_bench_report(bench: dict, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _dump_json(bench, out / "bench.json")
    (out / "bench.txt").write_text(
        f"images   {bench['n_images']} (+{bench['warmup']} warmup)\n"
        f"mean     {bench['time_mean_s'] * 1000:.2f} ms\n"
        f"std      {bench['time_std_s'] * 1000:.2f} ms\n"
        f"fps      {bench['fps']:.2f}\n"
    )
