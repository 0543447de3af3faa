#!/usr/bin/env python3
"""Benchmark the hot kernels under both backends.

    python benchmarks/bench_kernels.py [--size 512] [--repeat 5]

Numba timings exclude JIT compilation (one warmup call per kernel).
"""

import argparse
import time

import numpy as np

from uvfuse._kernels import _fill_offsets, numba_impl, numpy_impl

BACKENDS = {"numba": numba_impl, "numpy": numpy_impl}


def timeit(fn, repeat):
    fn()  # warmup (JIT compile / cache touch)
    best = float("inf")
    for _ in range(repeat):
        tic = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - tic)
    return best


def make_workloads(size, rng):
    n_faces = 2000
    tri_world = rng.uniform(-1, 1, (n_faces, 3, 3))
    cam = np.array([0.0, 0.0, 4.0])
    rel = tri_world - cam
    z = -rel[..., 2]
    keep = (z > 0.5).all(axis=1)
    tri_world, rel, z = tri_world[keep], rel[keep], z[keep]
    px = np.stack([(rel[..., 0] / (z * 0.5) + 1) * 0.5 * size,
                   (1 - rel[..., 1] / (z * 0.5)) * 0.5 * size], axis=-1)
    uv = rng.uniform(0, 1, (len(z), 3, 2))
    normals = rng.standard_normal((len(z), 3))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    fidx = np.arange(len(z), dtype=np.int32)

    n_px = size * size
    splat_args = (rng.uniform(-1, 1, (n_px, 3)), rng.uniform(0, 1, n_px),
                  rng.uniform(0, 1, n_px), rng.uniform(0, 1, n_px), size)

    tex = rng.uniform(-1, 1, (size, size, 3))
    covered = rng.uniform(size=(size, size)) > 0.3
    offsets = _fill_offsets(3)

    xs = rng.uniform(0, size - 1, n_px)
    ys = rng.uniform(0, size - 1, n_px)

    inp_valid = rng.uniform(size=(size, size)) > 0.4

    return {
        "rasterize_faces": (px, z, tri_world, uv, normals, fidx, cam, size, size),
        "splat_points": splat_args,
        "nearest_fill": (tex, covered, offsets),
        "bilinear_gather": (tex, covered, xs, ys),
        "inpaint_pass": (tex, inp_valid),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=512)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    workloads = make_workloads(args.size, rng)

    print(f"workload scale {args.size}, best of {args.repeat}")
    header = f"{'kernel':<16} {'numba (ms)':>12} {'numpy (ms)':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for kernel, kargs in workloads.items():
        times = {}
        for name, impl in BACKENDS.items():
            fn = getattr(impl, kernel)
            times[name] = timeit(lambda: fn(*kargs), args.repeat)
        speedup = times["numpy"] / times["numba"]
        print(f"{kernel:<16} {times['numba'] * 1e3:>12.2f} "
              f"{times['numpy'] * 1e3:>12.2f} {speedup:>8.1f}x")


if __name__ == "__main__":
    main()
