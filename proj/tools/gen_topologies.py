#!/usr/bin/env python3
"""Regenerate the bundled topology tables under configs/topologies/.

Dimensions follow the unpadded SCALE-Sim convention: ifmap_h/ifmap_w are the
spatial size of the layer input as it arrives; padding is not modeled.
"""
import os
import sys

HEADER = "name,kind,ifmap_h,ifmap_w,filter_h,filter_w,channels,num_filters,stride"


class Table:
    def __init__(self):
        self.rows = []

    def conv(self, name, size, k, cin, cout, stride=1):
        self.rows.append((name, "conv", size, size, k, k, cin, cout, stride))
        return (size - k) // stride + 1

    def dw(self, name, size, k, ch, stride=1):
        self.rows.append((name, "dwconv", size, size, k, k, ch, ch, stride))
        return (size - k) // stride + 1

    def fc(self, name, fin, fout):
        self.rows.append((name, "fc", 1, 1, 1, 1, fin, fout, 1))

    def write(self, path):
        with open(path, "w") as f:
            f.write(HEADER + "\n")
            for r in self.rows:
                f.write(",".join(str(v) for v in r) + "\n")


def resnet18():
    t = Table()
    t.conv("Conv1", 224, 7, 3, 64, 2)
    size, cin = 56, 64
    for stage, width in enumerate([64, 128, 256, 512]):
        for blk in range(2):
            stride = 2 if stage > 0 and blk == 0 else 1
            pre = f"Conv{stage + 2}_{blk + 1}"
            out = (size - 3) // stride + 1 if stride == 2 else size
            t.conv(pre + "a", size, 3, cin, width, stride)
            t.conv(pre + "b", out, 3, width, width)
            if stride == 2:
                t.conv(pre + "s", size, 1, cin, width, 2)
                size = size // 2
            cin = width
    t.fc("FC1000", 512, 1000)
    return t


def resnet32():
    t = Table()
    t.conv("Conv1", 32, 3, 3, 16)
    size, cin = 32, 16
    for stage, width in enumerate([16, 32, 64]):
        for blk in range(5):
            stride = 2 if stage > 0 and blk == 0 else 1
            pre = f"Conv{stage + 2}_{blk + 1}"
            t.conv(pre + "a", size, 3, cin, width, stride)
            if stride == 2:
                t.conv(pre + "s", size, 1, cin, width, 2)
                size = size // 2
            t.conv(pre + "b", size, 3, width, width)
            cin = width
    t.fc("FC10", 64, 10)
    return t


def resnet50():
    t = Table()
    t.conv("Conv1", 224, 7, 3, 64, 2)
    size, cin = 56, 64
    for stage, (width, blocks) in enumerate([(64, 3), (128, 4), (256, 6), (512, 3)]):
        for blk in range(blocks):
            stride = 2 if stage > 0 and blk == 0 else 1
            pre = f"Conv{stage + 2}_{blk + 1}"
            t.conv(pre + "a", size, 1, cin, width)
            t.conv(pre + "b", size, 3, width, width, stride)
            out = size // stride
            t.conv(pre + "c", out, 1, width, width * 4)
            if blk == 0:
                t.conv(pre + "s", size, 1, cin, width * 4, stride)
            size = out
            cin = width * 4
    t.fc("FC1000", 2048, 1000)
    return t


def mobilenet_v1():
    t = Table()
    t.conv("Conv1", 224, 3, 3, 32, 2)
    size, cin = 112, 32
    plan = [(64, 1), (128, 2), (128, 1), (256, 2), (256, 1), (512, 2)] + \
           [(512, 1)] * 5 + [(1024, 2), (1024, 1)]
    for i, (cout, stride) in enumerate(plan):
        t.dw(f"DW{i + 1}", size, 3, cin, stride)
        if stride == 2:
            size = size // 2
        t.conv(f"PW{i + 1}", size, 1, cin, cout)
        cin = cout
    t.fc("FC1000", 1024, 1000)
    return t


def efficientnet_b0():
    t = Table()
    t.conv("Stem", 224, 3, 3, 32, 2)
    size, cin = 112, 32
    stages = [(1, 3, 16, 1, 1), (6, 3, 24, 2, 2), (6, 5, 40, 2, 2), (6, 3, 80, 2, 3),
              (6, 5, 112, 1, 3), (6, 5, 192, 2, 4), (6, 3, 320, 1, 1)]
    for s, (expand, k, cout, stride, repeats) in enumerate(stages):
        for r in range(repeats):
            st = stride if r == 0 else 1
            pre = f"MB{s + 1}_{r + 1}"
            hidden = cin * expand
            if expand != 1:
                t.conv(pre + "_expand", size, 1, cin, hidden)
            t.dw(pre + "_dw", size, k, hidden, st)
            if st == 2:
                size = size // 2
            squeeze = max(1, cin // 4)
            t.fc(pre + "_se_reduce", hidden, squeeze)
            t.fc(pre + "_se_expand", squeeze, hidden)
            t.conv(pre + "_project", size, 1, hidden, cout)
            cin = cout
    t.conv("Head", size, 1, cin, 1280)
    t.fc("FC1000", 1280, 1000)
    return t


def googlenet():
    t = Table()
    t.conv("Conv1", 224, 7, 3, 64, 2)
    t.conv("Conv2_reduce", 56, 1, 64, 64)
    t.conv("Conv2", 56, 3, 64, 192)
    cin = 192
    blocks = [("3a", 28, 64, 96, 128, 16, 32, 32), ("3b", 28, 128, 128, 192, 32, 96, 64),
              ("4a", 14, 192, 96, 208, 16, 48, 64), ("4b", 14, 160, 112, 224, 24, 64, 64),
              ("4c", 14, 128, 128, 256, 24, 64, 64), ("4d", 14, 112, 144, 288, 32, 64, 64),
              ("4e", 14, 256, 160, 320, 32, 128, 128), ("5a", 7, 256, 160, 320, 32, 128, 128),
              ("5b", 7, 384, 192, 384, 48, 128, 128)]
    for name, size, c1, r3, c3, r5, c5, pp in blocks:
        p = f"Inc{name}"
        t.conv(p + "_1x1", size, 1, cin, c1)
        t.conv(p + "_3x3_reduce", size, 1, cin, r3)
        t.conv(p + "_3x3", size, 3, r3, c3)
        t.conv(p + "_5x5_reduce", size, 1, cin, r5)
        t.conv(p + "_5x5", size, 5, r5, c5)
        t.conv(p + "_pool_proj", size, 1, cin, pp)
        cin = c1 + c3 + c5 + pp
    t.fc("FC1000", 1024, 1000)
    return t


NETWORKS = {
    "resnet18": resnet18, "resnet32": resnet32, "resnet50": resnet50,
    "mobilenet_v1": mobilenet_v1, "efficientnet_b0": efficientnet_b0,
    "googlenet": googlenet,
}

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(
        os.path.dirname(__file__), "..", "configs", "topologies")
    os.makedirs(out, exist_ok=True)
    for name, build in NETWORKS.items():
        build().write(os.path.join(out, name + ".csv"))
