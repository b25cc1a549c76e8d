#!/usr/bin/env python3
"""Benchmark the hot remap kernels: compiled lane vs numpy fallback.

Times the two per-pixel kernels (projection-to-source evaluation and
bilinear resampling) on a live-view-sized workload and prints a comparison
table. Run from the repository root:

    python benchmarks/bench_remap.py [--out-width 1024] [--out-height 512]
"""

import argparse
import math
import time

import numpy as np

from orbview._kernels import _remap_np

try:
    from orbview._kernels import _remap_cy
except ImportError:
    _remap_cy = None

from orbview.projection import POLE_EPS
from orbview.remap import equirect_rays


def time_call(fn, *args, repeats=7):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-width", type=int, default=1024)
    parser.add_argument("--out-height", type=int, default=512)
    parser.add_argument("--src-size", type=int, default=2048)
    parser.add_argument("--repeats", type=int, default=7)
    args = parser.parse_args()

    ow, oh, n = args.out_width, args.out_height, args.out_width * args.out_height
    rays = np.ascontiguousarray(equirect_rays(ow, oh).reshape(-1, 3))
    alpha = math.radians(348.52)
    proj_args = (
        rays,
        math.sin(alpha / 4.0),
        math.cos(alpha / 2.0),
        POLE_EPS,
        args.src_size / 2.0 - 0.5,
        args.src_size / 2.0 - 0.5,
        args.src_size * 0.45,
    )

    rng = np.random.default_rng(0)
    src = rng.integers(0, 256, size=(args.src_size, args.src_size, 3)).astype(np.uint8)
    sx, sy, valid = _remap_np.project_to_source(*proj_args)
    sx = sx.reshape(oh, ow)
    sy = sy.reshape(oh, ow)
    valid2 = np.ascontiguousarray(valid.reshape(oh, ow))
    fill = np.zeros(3, np.uint8)

    lanes = [("numpy", _remap_np)]
    if _remap_cy is not None:
        lanes.append(("cython", _remap_cy))

    print(f"workload: {ow}x{oh} output, {args.src_size}^2 RGB8 source")
    print(f"{'kernel':<22}{'lane':<10}{'best ms':>10}{'Mpx/s':>10}")
    results = {}
    for name, lane in lanes:
        t = time_call(lane.project_to_source, *proj_args, repeats=args.repeats)
        results[("project", name)] = t
        print(f"{'project_to_source':<22}{name:<10}{t * 1e3:>10.2f}{n / t / 1e6:>10.1f}")
    for name, lane in lanes:
        t = time_call(
            lane.resample_bilinear, src, sx, sy, valid2, fill, repeats=args.repeats
        )
        results[("resample", name)] = t
        print(f"{'resample_bilinear':<22}{name:<10}{t * 1e3:>10.2f}{n / t / 1e6:>10.1f}")
    if _remap_cy is not None:
        for kernel in ("project", "resample"):
            ratio = results[(kernel, "numpy")] / results[(kernel, "cython")]
            print(f"{kernel}: compiled lane is {ratio:.1f}x the numpy lane")


if __name__ == "__main__":
    main()
