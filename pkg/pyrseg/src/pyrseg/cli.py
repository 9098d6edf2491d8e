"""Command-line interface: summary / train / eval / ablate."""

import argparse
import dataclasses
import json
import sys

from . import ablation
from .errors import PyrsegError
from .evaluate import evaluate
from .model import NetConfig, PRM_OPS, PRM_SOURCES, build_model, summary
from .trainer import DEFAULT_SCHEDULE, TrainConfig, load_checkpoint, train


def _add_net_args(p):
    p.add_argument("--backbone", default="toy18", choices=("toy18", "50", "101"))
    p.add_argument("--input-size", type=int, default=473)
    p.add_argument("--prior", action=argparse.BooleanOptionalAction, default=True,
                   help="chain each pyramid branch's output into the next branch")
    p.add_argument("--prm-source", default="none", choices=PRM_SOURCES)
    p.add_argument("--prm-op", default="two_convs", choices=PRM_OPS)
    p.add_argument("--aux-loss", action="store_true")


def _net_config(args) -> NetConfig:
    return NetConfig(
        backbone_depth=args.backbone, input_size=args.input_size,
        p3m_prior=args.prior, prm_source=args.prm_source, prm_op=args.prm_op,
        aux_loss=args.aux_loss).validate()


def _add_train_args(p):
    p.add_argument("--manifest", required=True)
    p.add_argument("--epochs", type=int, default=90)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--lr", type=float, default=1e-3,
                   help="base rate; drops x0.1 at epoch 50 and x0.01 at epoch 80")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-split", default="train", choices=("train", "val", "all"))
    p.add_argument("--val-split", default="val", choices=("train", "val", "all"))
    p.add_argument("--val-every", type=int, default=1)


def _train_config(args) -> TrainConfig:
    schedule = tuple((start, args.lr * base / DEFAULT_SCHEDULE[0][1])
                     for (start, base) in DEFAULT_SCHEDULE)
    return TrainConfig(
        epochs=args.epochs, batch_size=args.batch_size, lr_schedule=schedule,
        seed=args.seed, train_split=args.train_split, val_split=args.val_split,
        val_every=args.val_every).validate()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pyrseg", description="dual-pyramid segmentation trainer")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("summary", help="print an architecture summary as JSON")
    _add_net_args(p)

    p = sub.add_parser("train", help="train a model from a dataset manifest")
    _add_net_args(p)
    _add_train_args(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval", help="score a checkpoint and export predictions")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--split", default="val", choices=("train", "val", "all"))
    p.add_argument("--out", help="directory for pred_{id}.png files")
    p.add_argument("--cross-check", action="store_true",
                   help="verify against the dataset CLI's scoring (needs --out)")

    p = sub.add_parser("ablate", help="train/score a refinement-branch grid")
    _add_net_args(p)
    _add_train_args(p)
    p.add_argument("--out", required=True)
    p.add_argument("--table", default="2", choices=("2", "3", "both"))
    return parser


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _cmd_summary(args) -> int:
    _emit(summary(build_model(_net_config(args))))
    return 0


def _cmd_train(args) -> int:
    result = train(_net_config(args), _train_config(args), args.manifest, args.out,
                   log_fn=lambda rec: print(json.dumps(rec), file=sys.stderr))
    _emit({
        "checkpoint": result["checkpoint_path"],
        "log": result["log_path"],
        "epochs": len(result["records"]),
        "final_loss": result["records"][-1]["loss"],
        "final_val_miou": result["records"][-1].get("val_miou"),
    })
    return 0


def _cmd_eval(args) -> int:
    model, _ = load_checkpoint(args.checkpoint)
    report = evaluate(model, args.manifest, split=args.split,
                      out_dir=args.out, cross_check=args.cross_check)
    _emit(report)
    return 0


def _cmd_ablate(args) -> int:
    base = _net_config(args)
    grid = []
    if args.table in ("2", "both"):
        grid += ablation.table2_grid(base)
    if args.table in ("3", "both"):
        grid += ablation.table3_grid(base)
    table = ablation.run_ablation(
        grid, args.manifest, _train_config(args), args.out,
        log_fn=lambda row: print(json.dumps(row), file=sys.stderr))
    paths = ablation.write_table(table, args.out)
    _emit({**table, "files": paths})
    return 0


_COMMANDS = {"summary": _cmd_summary, "train": _cmd_train,
             "eval": _cmd_eval, "ablate": _cmd_ablate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except PyrsegError as e:
        json.dump({"error": e.__class__.__name__, "message": str(e)}, sys.stderr)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
