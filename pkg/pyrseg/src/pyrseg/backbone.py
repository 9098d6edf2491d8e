"""Dilated residual backbones exposing five tapped feature stages.

Stage strides relative to the input are fixed at {2, 4, 8, 8, 8}: the stem
(res1) halves, the next two stages reach strides 4 and 8, and the last two
stay at stride 8 using dilations 2 and 4. Every depth shares this signature;
depth only changes block type, counts, and widths.
"""

import torch
from torch import nn

from .errors import ModelConfigError

STAGES = ("res1", "res2", "res3", "res4", "res5")
STAGE_STRIDES = {"res1": 2, "res2": 4, "res3": 8, "res4": 8, "res5": 8}


def conv3x3(cin: int, cout: int, stride: int = 1, dilation: int = 1) -> nn.Conv2d:
    return nn.Conv2d(cin, cout, 3, stride=stride, padding=dilation,
                     dilation=dilation, bias=False)


class BasicBlock(nn.Module):
    expansion = 1

    def __init__(self, cin: int, planes: int, stride: int = 1, dilation: int = 1):
        super().__init__()
        self.conv1 = conv3x3(cin, planes, stride, dilation)
        self.bn1 = nn.BatchNorm2d(planes)
        self.conv2 = conv3x3(planes, planes, 1, dilation)
        self.bn2 = nn.BatchNorm2d(planes)
        self.relu = nn.ReLU(inplace=True)
        self.down = None
        if stride != 1 or cin != planes:
            self.down = nn.Sequential(
                nn.Conv2d(cin, planes, 1, stride=stride, bias=False),
                nn.BatchNorm2d(planes),
            )

    def forward(self, x):
        identity = x if self.down is None else self.down(x)
        out = self.relu(self.bn1(self.conv1(x)))
        out = self.bn2(self.conv2(out))
        return self.relu(out + identity)


class Bottleneck(nn.Module):
    expansion = 4

    def __init__(self, cin: int, planes: int, stride: int = 1, dilation: int = 1):
        super().__init__()
        cout = planes * self.expansion
        self.conv1 = nn.Conv2d(cin, planes, 1, bias=False)
        self.bn1 = nn.BatchNorm2d(planes)
        self.conv2 = conv3x3(planes, planes, stride, dilation)
        self.bn2 = nn.BatchNorm2d(planes)
        self.conv3 = nn.Conv2d(planes, cout, 1, bias=False)
        self.bn3 = nn.BatchNorm2d(cout)
        self.relu = nn.ReLU(inplace=True)
        self.down = None
        if stride != 1 or cin != cout:
            self.down = nn.Sequential(
                nn.Conv2d(cin, cout, 1, stride=stride, bias=False),
                nn.BatchNorm2d(cout),
            )

    def forward(self, x):
        identity = x if self.down is None else self.down(x)
        out = self.relu(self.bn1(self.conv1(x)))
        out = self.relu(self.bn2(self.conv2(out)))
        out = self.bn3(self.conv3(out))
        return self.relu(out + identity)


_ARCHS = {
    "toy18": dict(block=BasicBlock, layers=(2, 2, 2, 2),
                  widths=(48, 64, 96, 128), stem=32, big_stem=False),
    "50": dict(block=Bottleneck, layers=(3, 4, 6, 3),
               widths=(64, 128, 256, 512), stem=64, big_stem=True),
    "101": dict(block=Bottleneck, layers=(3, 4, 23, 3),
                widths=(64, 128, 256, 512), stem=64, big_stem=True),
}


def _make_stage(block, cin, planes, count, stride, dilation):
    blocks = [block(cin, planes, stride=stride, dilation=dilation)]
    for _ in range(count - 1):
        blocks.append(block(planes * block.expansion, planes, dilation=dilation))
    return nn.Sequential(*blocks)


class Backbone(nn.Module):
    """Feature extractor; forward returns {stage: tensor} for res1..res5."""

    def __init__(self, depth: str = "toy18"):
        super().__init__()
        if depth not in _ARCHS:
            raise ModelConfigError(f"unknown backbone depth {depth!r}; "
                                   f"expected one of {sorted(_ARCHS)}")
        arch = _ARCHS[depth]
        block, layers, widths, stem = arch["block"], arch["layers"], arch["widths"], arch["stem"]
        self.depth = depth
        if arch["big_stem"]:
            self.stem = nn.Sequential(
                nn.Conv2d(3, stem, 7, stride=2, padding=3, bias=False),
                nn.BatchNorm2d(stem), nn.ReLU(inplace=True))
            self.pool = nn.MaxPool2d(3, stride=2, padding=1)
            stage2_stride = 1
        else:
            self.stem = nn.Sequential(
                nn.Conv2d(3, stem, 3, stride=2, padding=1, bias=False),
                nn.BatchNorm2d(stem), nn.ReLU(inplace=True))
            self.pool = None
            stage2_stride = 2
        exp = block.expansion
        self.stage2 = _make_stage(block, stem, widths[0], layers[0], stage2_stride, 1)
        self.stage3 = _make_stage(block, widths[0] * exp, widths[1], layers[1], 2, 1)
        self.stage4 = _make_stage(block, widths[1] * exp, widths[2], layers[2], 1, 2)
        self.stage5 = _make_stage(block, widths[2] * exp, widths[3], layers[3], 1, 4)
        self.stage_channels = {
            "res1": stem,
            "res2": widths[0] * exp,
            "res3": widths[1] * exp,
            "res4": widths[2] * exp,
            "res5": widths[3] * exp,
        }

    def forward(self, x: torch.Tensor) -> dict:
        res1 = self.stem(x)
        x = self.pool(res1) if self.pool is not None else res1
        res2 = self.stage2(x)
        res3 = self.stage3(res2)
        res4 = self.stage4(res3)
        res5 = self.stage5(res4)
        return {"res1": res1, "res2": res2, "res3": res3, "res4": res4, "res5": res5}
