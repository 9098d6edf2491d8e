"""Network construction, config validation, and structural contracts."""

import json

import pytest
import torch
import torch.nn.functional as F

from pyrseg.errors import ModelConfigError
from pyrseg.model import NetConfig, PyramidModule, RefineModule, build_model, summary


def tiny(**kw):
    kw.setdefault("backbone_depth", "toy18")
    kw.setdefault("input_size", 64)
    return NetConfig(**kw)


def test_valid_config_combinations():
    for source, op in [("res1", "two_convs"), ("res2", "two_convs"),
                       ("res1", "maxpool_s4"), ("res1", "avgpool_s4"),
                       ("res3", "encoder_decoder"), ("res4", "encoder_decoder"),
                       ("res5", "encoder_decoder")]:
        tiny(prm_source=source, prm_op=op).validate()
    tiny(prm_source="none").validate()


@pytest.mark.parametrize("kw", [
    dict(prm_source="res1", prm_op="encoder_decoder"),
    dict(prm_source="res3", prm_op="two_convs"),
    dict(prm_source="res2", prm_op="maxpool_s4"),
    dict(prm_source="res5", prm_op="avgpool_s4"),
    dict(prm_source="res1", prm_op="bogus"),
    dict(prm_source="res0"),
    dict(backbone_depth="152"),
    dict(pool_scales=()),
    dict(pool_scales=(1, 3, 2)),
    dict(pool_scales=(1, 1, 2)),
    dict(num_classes=1),
    dict(input_size=40),
    dict(dropout=1.0),
])
def test_invalid_configs_rejected(kw):
    with pytest.raises(ModelConfigError):
        tiny(**kw).validate()


def test_backbone_stage_strides_and_channels():
    model = build_model(tiny()).eval()
    with torch.no_grad():
        feats = model.backbone(torch.randn(1, 3, 64, 64))
    assert tuple(feats["res1"].shape[-2:]) == (32, 32)
    assert tuple(feats["res2"].shape[-2:]) == (16, 16)
    for stage in ("res3", "res4", "res5"):
        assert tuple(feats[stage].shape[-2:]) == (8, 8)
    assert feats["res5"].shape[1] == model.backbone.stage_channels["res5"] == 128


def test_depth50_stride_signature():
    model = build_model(NetConfig(backbone_depth="50", input_size=64)).eval()
    with torch.no_grad():
        feats = model.backbone(torch.randn(1, 3, 64, 64))
    dims = [tuple(feats[s].shape[-2:]) for s in ("res1", "res2", "res3", "res4", "res5")]
    assert dims == [(32, 32), (16, 16), (8, 8), (8, 8), (8, 8)]
    assert feats["res5"].shape[1] == 2048


def test_disabled_prior_equals_plain_pyramid_pooling():
    torch.manual_seed(0)
    p3m = PyramidModule(32, (1, 2, 3, 6), prior=False).eval()
    x = torch.randn(2, 32, 12, 12)
    with torch.no_grad():
        outs = p3m(x)
        for branch, out in zip(p3m.branches, outs):
            ref = branch.relu(branch.bn(branch.conv(branch.pool(x))))
            ref = F.interpolate(ref, size=x.shape[-2:], mode="bilinear",
                                align_corners=False)
            assert torch.equal(out, ref)
    assert p3m.cross_branch_edges() == 0
    assert p3m.priors is None


def test_prior_adds_exactly_three_projections():
    plain = build_model(tiny(p3m_prior=False))
    chained = build_model(tiny(p3m_prior=True))
    assert chained.p3m.cross_branch_edges() == 3
    c5 = plain.backbone.stage_channels["res5"]
    extra = sum(p.numel() for p in chained.parameters()) \
        - sum(p.numel() for p in plain.parameters())
    assert extra == 3 * (c5 // 4) * c5  # three bias-free 1x1 projections


def test_prior_path_changes_output():
    x = torch.randn(1, 3, 64, 64)
    torch.manual_seed(1)
    plain = build_model(tiny(p3m_prior=False)).eval()
    torch.manual_seed(1)
    chained = build_model(tiny(p3m_prior=True)).eval()
    with torch.no_grad():
        assert not torch.equal(plain(x), chained(x))


def test_avgpool_refine_preserves_constants():
    refine = RefineModule("res1", "avgpool_s4", 16, 32).eval()
    x = torch.full((1, 16, 32, 32), 3.25)
    with torch.no_grad():
        y = refine(x, (8, 8))
    assert y.shape == (1, 16, 8, 8)
    assert torch.allclose(y, torch.full_like(y, 3.25))


def test_two_convs_strides_per_source():
    res1 = RefineModule("res1", "two_convs", 16, 32)
    res2 = RefineModule("res2", "two_convs", 16, 32)
    assert res1.net[0].stride == (2, 2) and res1.net[3].stride == (2, 2)
    assert res2.net[0].stride == (2, 2) and res2.net[3].stride == (1, 1)


def test_refine_lands_on_deep_feature_dims():
    model = build_model(tiny(prm_source="res1", prm_op="maxpool_s4")).eval()
    with torch.no_grad():
        feats = model.backbone(torch.randn(1, 3, 100, 100))
        out = model.prm(feats["res1"], feats["res5"].shape[-2:])
    assert out.shape[-2:] == feats["res5"].shape[-2:]


def test_class_permutation_permutes_logits():
    model = build_model(tiny(prm_source="res1", prm_op="two_convs")).eval()
    x = torch.randn(1, 3, 64, 64)
    with torch.no_grad():
        base = model(x)
        perm = torch.tensor([2, 0, 1])
        model.classifier.weight.data = model.classifier.weight.data[perm]
        model.classifier.bias.data = model.classifier.bias.data[perm]
        permuted = model(x)
    assert torch.equal(permuted, base[:, perm])


def test_input_below_pool_scale_rejected():
    model = build_model(tiny()).eval()
    with pytest.raises(ModelConfigError):
        with torch.no_grad():
            model(torch.randn(1, 3, 32, 32))


def test_logits_finite():
    model = build_model(tiny(prm_source="res1", prm_op="two_convs")).eval()
    with torch.no_grad():
        y = model(torch.randn(2, 3, 64, 64))
    assert torch.isfinite(y).all()


def test_summary_reports_architecture():
    model = build_model(tiny(prm_source="res3", prm_op="encoder_decoder"))
    info = summary(model)
    assert set(info) == {"config", "parameter_count", "layers"}
    assert info["parameter_count"] == sum(p.numel() for p in model.parameters())
    names = {layer["name"] for layer in info["layers"]}
    assert {"backbone", "p3m", "prm", "head", "classifier"} <= names
    assert info["config"]["prm_source"] == "res3"
    assert json.loads(json.dumps(info)) == info
