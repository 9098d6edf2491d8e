"""Dual-pyramid segmentation network.

A dilated backbone feeds a pyramid pooling module whose branches optionally
chain a prior from each coarser branch into the next one (three cross-branch
edges), plus a refinement branch that brings one shallow backbone tap back to
the deep-feature resolution. Everything is concatenated and classified at
stride 8, then upsampled to the input size.
"""

import dataclasses
from dataclasses import dataclass

import torch
import torch.nn.functional as F
from torch import nn

from .backbone import _ARCHS, STAGE_STRIDES, STAGES, Backbone, conv3x3
from .errors import ModelConfigError

PRM_SOURCES = ("none",) + STAGES
PRM_OPS = ("two_convs", "maxpool_s4", "avgpool_s4", "encoder_decoder")

# net downsampling each refine op applies, per allowed source; the product
# source_stride * op_downsampling must equal the deep-feature stride 8
_OP_DOWNSAMPLING = {
    "two_convs": {"res1": 4, "res2": 2},
    "maxpool_s4": {"res1": 4},
    "avgpool_s4": {"res1": 4},
    "encoder_decoder": {"res3": 1, "res4": 1, "res5": 1},
}


@dataclass(frozen=True)
class NetConfig:
    backbone_depth: str = "toy18"
    pool_scales: tuple = (1, 2, 3, 6)
    p3m_prior: bool = True
    prm_source: str = "none"
    prm_op: str = "two_convs"
    num_classes: int = 3
    input_size: int = 473
    aux_loss: bool = False
    dropout: float = 0.1

    def validate(self) -> "NetConfig":
        if self.backbone_depth not in _ARCHS:
            raise ModelConfigError(f"backbone_depth must be one of {sorted(_ARCHS)}, "
                                   f"got {self.backbone_depth!r}")
        scales = tuple(self.pool_scales)
        if not scales or any(int(s) != s or s < 1 for s in scales):
            raise ModelConfigError(f"pool_scales must be positive ints, got {scales}")
        if list(scales) != sorted(set(scales)):
            raise ModelConfigError(f"pool_scales must be strictly increasing, got {scales}")
        if self.prm_source not in PRM_SOURCES:
            raise ModelConfigError(f"prm_source must be one of {PRM_SOURCES}, "
                                   f"got {self.prm_source!r}")
        if self.prm_source != "none":
            if self.prm_op not in PRM_OPS:
                raise ModelConfigError(f"prm_op must be one of {PRM_OPS}, got {self.prm_op!r}")
            allowed = _OP_DOWNSAMPLING[self.prm_op]
            if self.prm_source not in allowed:
                raise ModelConfigError(
                    f"prm_op {self.prm_op!r} cannot refine {self.prm_source!r}; "
                    f"valid sources: {sorted(allowed)}")
            if STAGE_STRIDES[self.prm_source] * allowed[self.prm_source] != 8:
                raise ModelConfigError(
                    f"{self.prm_source}+{self.prm_op} does not land on stride 8")
        if self.num_classes < 2:
            raise ModelConfigError(f"num_classes must be >= 2, got {self.num_classes}")
        if self.input_size < 8 * max(scales):
            raise ModelConfigError(f"input_size {self.input_size} too small for "
                                   f"pool scale {max(scales)} at stride 8")
        if not 0.0 <= self.dropout < 1.0:
            raise ModelConfigError(f"dropout must be in [0, 1), got {self.dropout}")
        return self

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["pool_scales"] = list(self.pool_scales)
        return d


class PyramidBranch(nn.Module):
    """Adaptive-pool to one grid scale, squeeze channels, normalize."""

    def __init__(self, cin: int, cout: int, scale: int):
        super().__init__()
        self.scale = scale
        self.pool = nn.AdaptiveAvgPool2d(scale)
        self.conv = nn.Conv2d(cin, cout, 1, bias=False)
        self.bn = nn.BatchNorm2d(cout)
        self.relu = nn.ReLU(inplace=True)

    def forward(self, x):
        return self.relu(self.bn(self.conv(self.pool(x))))


class PyramidModule(nn.Module):
    """Pyramid pooling over `scales`, coarse to fine.

    With `prior` enabled, each branch's pooled output is projected back to the
    input channel count, upsampled, and added to the next branch's input —
    one cross-branch edge per adjacent scale pair. With it disabled the module
    is exactly plain pyramid pooling (no extra parameters, no edges).
    """

    def __init__(self, cin: int, scales, prior: bool):
        super().__init__()
        self.out_channels = cin // 4
        self.branches = nn.ModuleList(
            [PyramidBranch(cin, self.out_channels, s) for s in scales])
        self.priors = None
        if prior:
            self.priors = nn.ModuleList(
                [nn.Conv2d(self.out_channels, cin, 1, bias=False)
                 for _ in scales[1:]])

    def cross_branch_edges(self) -> int:
        return 0 if self.priors is None else len(self.priors)

    def forward(self, x):
        size = x.shape[-2:]
        outs = []
        prev = None
        for i, branch in enumerate(self.branches):
            inp = x
            if self.priors is not None and prev is not None:
                prior = F.interpolate(self.priors[i - 1](prev), size=size,
                                      mode="bilinear", align_corners=False)
                inp = x + prior
            prev = branch(inp)
            outs.append(F.interpolate(prev, size=size,
                                      mode="bilinear", align_corners=False))
        return outs


class RefineModule(nn.Module):
    """Brings one shallow backbone tap down to the deep-feature resolution."""

    def __init__(self, source: str, op: str, cin: int, cout: int):
        super().__init__()
        self.source = source
        self.op = op
        if op == "two_convs":
            s1, s2 = (2, 2) if source == "res1" else (2, 1)
            self.net = nn.Sequential(
                conv3x3(cin, cout, stride=s1), nn.BatchNorm2d(cout), nn.ReLU(inplace=True),
                conv3x3(cout, cout, stride=s2), nn.BatchNorm2d(cout), nn.ReLU(inplace=True))
            self.out_channels = cout
        elif op == "maxpool_s4":
            self.net = nn.MaxPool2d(3, stride=4, padding=1)
            self.out_channels = cin
        elif op == "avgpool_s4":
            self.net = nn.AvgPool2d(3, stride=4, padding=1, count_include_pad=False)
            self.out_channels = cin
        elif op == "encoder_decoder":
            self.net = nn.Sequential(
                conv3x3(cin, cout, stride=2), nn.BatchNorm2d(cout), nn.ReLU(inplace=True),
                nn.ConvTranspose2d(cout, cout, 4, stride=2, padding=1, bias=False),
                nn.BatchNorm2d(cout), nn.ReLU(inplace=True))
            self.out_channels = cout
        else:
            raise ModelConfigError(f"unknown prm_op {op!r}")

    def forward(self, x, size):
        y = self.net(x)
        if y.shape[-2:] != tuple(size):
            y = F.interpolate(y, size=size, mode="bilinear", align_corners=False)
        return y


class DualPyramidNet(nn.Module):
    """Backbone + pyramid module + optional refine branch + fusion head."""

    def __init__(self, config: NetConfig):
        super().__init__()
        config.validate()
        self.config = config
        self.backbone = Backbone(config.backbone_depth)
        ch = self.backbone.stage_channels
        c5 = ch["res5"]
        cb = c5 // 4
        self.p3m = PyramidModule(c5, tuple(config.pool_scales), config.p3m_prior)
        self.prm = None
        if config.prm_source != "none":
            self.prm = RefineModule(config.prm_source, config.prm_op,
                                    ch[config.prm_source], cb)
        fuse_in = c5 + cb * len(config.pool_scales)
        if self.prm is not None:
            fuse_in += self.prm.out_channels
        self.head = nn.Sequential(
            conv3x3(fuse_in, cb), nn.BatchNorm2d(cb), nn.ReLU(inplace=True),
            nn.Dropout2d(config.dropout))
        self.classifier = nn.Conv2d(cb, config.num_classes, 1)
        self.aux_head = None
        if config.aux_loss:
            c4 = ch["res4"]
            self.aux_head = nn.Sequential(
                conv3x3(c4, cb), nn.BatchNorm2d(cb), nn.ReLU(inplace=True),
                nn.Conv2d(cb, config.num_classes, 1))
        self.apply(_init_weights)

    def forward(self, x):
        h, w = x.shape[-2:]
        feats = self.backbone(x)
        res5 = feats["res5"]
        if min(res5.shape[-2:]) < max(self.config.pool_scales):
            raise ModelConfigError(
                f"input {h}x{w} gives deep feature {tuple(res5.shape[-2:])}, "
                f"smaller than pool scale {max(self.config.pool_scales)}")
        parts = [res5] + self.p3m(res5)
        if self.prm is not None:
            parts.append(self.prm(feats[self.config.prm_source], res5.shape[-2:]))
        y = self.classifier(self.head(torch.cat(parts, dim=1)))
        logits = F.interpolate(y, size=(h, w), mode="bilinear", align_corners=False)
        if self.aux_head is not None:
            aux = F.interpolate(self.aux_head(feats["res4"]), size=(h, w),
                                mode="bilinear", align_corners=False)
            return logits, aux
        return logits


def _init_weights(m):
    if isinstance(m, (nn.Conv2d, nn.ConvTranspose2d)):
        nn.init.kaiming_normal_(m.weight, mode="fan_out", nonlinearity="relu")
        if m.bias is not None:
            nn.init.zeros_(m.bias)
    elif isinstance(m, nn.BatchNorm2d):
        nn.init.ones_(m.weight)
        nn.init.zeros_(m.bias)


def build_model(config: NetConfig) -> DualPyramidNet:
    return DualPyramidNet(config)


def summary(model: DualPyramidNet) -> dict:
    """Architecture summary: config, parameter count, per-submodule layer list."""
    layers = []
    for name, mod in model.named_children():
        if mod is None:
            continue
        layers.append({
            "name": name,
            "type": mod.__class__.__name__,
            "parameters": int(sum(p.numel() for p in mod.parameters())),
        })
    return {
        "config": model.config.to_dict(),
        "parameter_count": int(sum(p.numel() for p in model.parameters())),
        "layers": layers,
    }
