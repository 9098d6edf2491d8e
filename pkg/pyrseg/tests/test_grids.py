"""Ablation grids: row definitions, failure tolerance, table rendering."""

import dataclasses
import json

from pyrseg.ablation import (
    COLUMNS,
    format_table,
    run_ablation,
    table2_grid,
    table3_grid,
    write_table,
)
from pyrseg.model import NetConfig
from pyrseg.trainer import TrainConfig

BASE = NetConfig(backbone_depth="toy18", input_size=64)
QUICK = TrainConfig(epochs=1, batch_size=4, val_every=0)


def test_source_sweep_rows():
    grid = table2_grid(BASE)
    assert [(f, l) for f, l, _ in grid] == [
        ("Res5", "Encoder-Decoder"), ("Res4", "Encoder-Decoder"),
        ("Res3", "Encoder-Decoder"), ("Res2", "Two Convs"),
        ("Res1", "Two Convs")]
    for _, _, config in grid:
        config.validate()
        assert config.p3m_prior is True


def test_op_sweep_rows():
    grid = table3_grid(BASE)
    assert [(f, l) for f, l, _ in grid] == [
        ("Res1", "Maxpooling(s=4)"), ("Res1", "Avgpooling(s=4)"),
        ("Res1", "Two Convs(s=2)")]
    assert [c.prm_op for _, _, c in grid] == ["maxpool_s4", "avgpool_s4", "two_convs"]
    for _, _, config in grid:
        config.validate()


def test_empty_grid_succeeds(tiny_manifest, tmp_path):
    table = run_ablation([], tiny_manifest, QUICK, tmp_path)
    assert table == {"columns": list(COLUMNS), "rows": []}
    paths = write_table(table, tmp_path)
    assert json.loads(open(paths["json"]).read()) == table
    assert format_table(table).splitlines()[0].startswith("PRM feature")


def test_failed_config_becomes_error_row(tiny_manifest, tmp_path):
    good = dataclasses.replace(BASE, p3m_prior=True,
                               prm_source="res1", prm_op="two_convs")
    # invalid op/source pairing fails at build time inside the runner
    bad = dataclasses.replace(BASE, prm_source="res1", prm_op="encoder_decoder")
    grid = [("Res1", "Two Convs", good), ("Res1", "Encoder-Decoder", bad)]
    table = run_ablation(grid, tiny_manifest, QUICK, tmp_path)
    assert len(table["rows"]) == 2
    ok, failed = table["rows"]
    assert ok["mIoU"] is not None and "error" not in ok
    assert failed["mIoU"] is None and "cannot refine" in failed["error"]


def test_table_text_rendering():
    table = {
        "columns": list(COLUMNS),
        "rows": [
            {"PRM feature": "Res1", "Layers": "Two Convs", "Mean Acc": 0.9163,
             "barcode IoU": 0.8472, "QR code IoU": 0.9073, "mIoU": 0.8901},
            {"PRM feature": "Res9", "Layers": "Nope", "Mean Acc": None,
             "barcode IoU": None, "QR code IoU": None, "mIoU": None,
             "error": "bad config"},
        ],
    }
    text = format_table(table)
    lines = text.splitlines()
    assert len(lines) == 3
    for column in COLUMNS:
        assert column in lines[0]
    assert "0.9163" in lines[1]
    assert "error: bad config" in lines[2]
    # aligned: every data column starts where the header column starts
    start = lines[0].index("Mean Acc")
    assert lines[1][start:].startswith("0.9163")


def test_write_table_files(tmp_path):
    table = {"columns": list(COLUMNS), "rows": []}
    paths = write_table(table, tmp_path / "out")
    assert json.loads(open(paths["json"]).read()) == table
    assert open(paths["text"]).read().strip()
