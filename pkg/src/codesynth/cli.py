"""Command-line interface.

Subcommands:
  patches      generate/ingest code patches into a patch directory
  backgrounds  generate background images
  synth        render a full dataset (images + masks + manifest)
  eval         score predictions (or the built-in baseline) against a manifest
  bench        time a segmenter and report FPS
  stats        dataset statistics report

Every command accepting --seed is deterministic: the same seed and inputs
produce byte-identical outputs, independent of --jobs.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import backgrounds as bg
from . import baseline, dataset_io, report
from .config import RunConfig, generate_assets
from .errors import CodesynthError, EvaluationError
from .metrics import ConfusionMatrix, fps_benchmark
from .patches import save_patches


def _load_config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    if getattr(args, "seed", None) is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    if getattr(args, "colorize", False):
        cfg = dataclasses.replace(cfg, dataset=dataclasses.replace(cfg.dataset, colorize=True))
    return cfg


def _emit(obj: dict) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def cmd_patches(args) -> None:
    cfg = _load_config(args)
    base = Path(args.config).parent if args.config else Path(".")
    assets = generate_assets(cfg.patchgen, cfg.seed, base)
    save_patches(assets, args.out)
    _emit({"patches": len(assets), "out": str(args.out)})


def cmd_backgrounds(args) -> None:
    styles = tuple(args.styles.split(",")) if args.styles else bg.STYLES
    ids = bg.gen_backgrounds(args.out, args.count, args.width, args.height, args.seed, styles)
    _emit({"backgrounds": len(ids), "out": str(args.out)})


def cmd_synth(args) -> None:
    cfg = _load_config(args)
    log_fn = None
    if args.log == "json":
        log_fn = lambda entry: print(json.dumps(entry), flush=True)  # noqa: E731
    manifest = dataset_io.generate_dataset(
        cfg, args.backgrounds, args.patches, args.out, jobs=args.jobs, log_fn=log_fn
    )
    entries = manifest["entries"]
    n_train = sum(e["split"] == "train" for e in entries)
    _emit(
        {
            "entries": len(entries),
            "train": n_train,
            "val": len(entries) - n_train,
            "manifest": str(Path(args.out) / "manifest.json"),
        }
    )


def _iter_split(manifest: dict, base: Path, split: str):
    for e in manifest["entries"]:
        if split != "all" and e["split"] != split:
            continue
        yield e


def cmd_eval(args) -> None:
    manifest = dataset_io.load_manifest(args.manifest)
    base = Path(args.manifest).parent
    cm = ConfusionMatrix()
    n = 0
    for e in _iter_split(manifest, base, args.split):
        gt = dataset_io.load_mask(base / e["mask_path"])
        if args.pred_dir:
            pred_path = Path(args.pred_dir) / f"pred_{e['id']:06d}.png"
            if not pred_path.exists():
                raise EvaluationError(f"missing prediction file {pred_path}")
            pred = dataset_io.load_mask(pred_path)
        else:
            pred = baseline.segment(dataset_io.load_image(base / e["image_path"]))
        cm.accumulate(pred, gt)
        n += 1
    if n == 0:
        raise EvaluationError(f"no entries in split {args.split!r}")
    rep = cm.report()
    rep["split"] = args.split
    rep["n_images"] = n
    rep["segmenter"] = "baseline" if not args.pred_dir else None
    _emit(rep)
    if args.out:
        report.write_eval_report(rep, args.out)


def cmd_bench(args) -> None:
    manifest = dataset_io.load_manifest(args.manifest)
    base = Path(args.manifest).parent
    images = []
    for e in _iter_split(manifest, base, args.split):
        images.append(dataset_io.load_image(base / e["image_path"]))
        if args.limit and len(images) >= args.limit:
            break
    bench = fps_benchmark(lambda img: baseline.segment(img), images, warmup=args.warmup)
    bench["segmenter"] = "baseline"
    _emit(bench)
    if args.out:
        report.write_bench_report(bench, args.out)


def cmd_stats(args) -> None:
    manifest = dataset_io.load_manifest(args.manifest)
    stats = dataset_io.dataset_stats(manifest, Path(args.manifest).parent)
    _emit(stats)
    if args.out:
        lam = manifest["config_snapshot"]["sampler"]["lambda"]
        report.write_stats_report(stats, args.out, lam=lam)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="codesynth", description=__doc__.strip().splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    pp = sub.add_parser("patches", help="generate/ingest code patches")
    pp.add_argument("--config", help="run-config JSON")
    pp.add_argument("--seed", type=int, help="override config seed")
    pp.add_argument("--out", required=True, help="output patch directory")
    pp.set_defaults(fn=cmd_patches)

    pb = sub.add_parser("backgrounds", help="generate background images")
    pb.add_argument("--count", type=int, default=20)
    pb.add_argument("--width", type=int, default=640)
    pb.add_argument("--height", type=int, default=480)
    pb.add_argument("--seed", type=int, default=0)
    pb.add_argument("--styles", help=f"comma-separated subset of {','.join(bg.STYLES)}")
    pb.add_argument("--out", required=True)
    pb.set_defaults(fn=cmd_backgrounds)

    ps = sub.add_parser("synth", help="render a dataset")
    ps.add_argument("--config", help="run-config JSON")
    ps.add_argument("--seed", type=int, help="override config seed")
    ps.add_argument("--backgrounds", required=True, help="background PNG directory")
    ps.add_argument("--patches", required=True, help="patch directory from `patches`")
    ps.add_argument("--out", required=True, help="dataset output directory")
    ps.add_argument("--jobs", type=int, default=1, help="worker threads (never affects bytes)")
    ps.add_argument("--colorize", action="store_true", help="also write green/yellow mask previews")
    ps.add_argument("--log", choices=["none", "json"], default="none")
    ps.set_defaults(fn=cmd_synth)

    pe = sub.add_parser("eval", help="evaluate predictions or the baseline segmenter")
    pe.add_argument("--manifest", required=True)
    pe.add_argument("--split", choices=["train", "val", "all"], default="val")
    group = pe.add_mutually_exclusive_group(required=True)
    group.add_argument("--pred-dir", help="directory of pred_{id:06}.png masks")
    group.add_argument("--segmenter", choices=["baseline"], help="run a built-in segmenter")
    pe.add_argument("--out", help="write report files (json/txt/csv/png) here")
    pe.set_defaults(fn=cmd_eval)

    pf = sub.add_parser("bench", help="FPS benchmark of the baseline segmenter")
    pf.add_argument("--manifest", required=True)
    pf.add_argument("--split", choices=["train", "val", "all"], default="val")
    pf.add_argument("--segmenter", choices=["baseline"], default="baseline")
    pf.add_argument("--warmup", type=int, default=1)
    pf.add_argument("--limit", type=int, help="cap the number of timed images")
    pf.add_argument("--out", help="write report files here")
    pf.set_defaults(fn=cmd_bench)

    pt = sub.add_parser("stats", help="dataset statistics")
    pt.add_argument("--manifest", required=True)
    pt.add_argument("--out", help="write report files here")
    pt.set_defaults(fn=cmd_stats)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.fn(args)
    except CodesynthError as e:
        json.dump({"error": type(e).__name__, "message": str(e)}, sys.stderr)
        sys.stderr.write("\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
