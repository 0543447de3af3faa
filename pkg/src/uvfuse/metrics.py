"""Quality/consistency measurements used by the pipeline and tests."""

from __future__ import annotations

import numpy as np

from .cameras import ViewRig
from .geometry import TexturedMesh
from .raster import ViewBuffers, rasterize, render_textured


def psnr(a: np.ndarray, b: np.ndarray, mask: np.ndarray | None = None,
         peak: float = 2.0) -> float:
    """Peak signal-to-noise ratio in dB; `peak` defaults to the [-1, 1]
    data range. Mask selects spatial positions (leading dims)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if mask is not None:
        a = a[mask]
        b = b[mask]
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return float("inf")
    return 10.0 * np.log10(peak * peak / mse)


def view_consistency(images: np.ndarray, buffers: list[ViewBuffers],
                     resolution: int = 256) -> float:
    """Mean cross-view color disagreement at shared surface points.

    Each view's foreground pixels are binned to texels through the UV
    buffers; for every texel seen by several views, per-view mean colors
    are compared over all view pairs. Returns the mean absolute
    difference (averaged over channels, texels, and pairs); 0.0 when no
    texel is shared.
    """
    n_views = len(buffers)
    sums = np.zeros((n_views, resolution * resolution, 3))
    counts = np.zeros((n_views, resolution * resolution))
    for v, buf in enumerate(buffers):
        m = buf.mask
        if not m.any():
            continue
        cols = np.clip((buf.uv[m, 0] * resolution).astype(np.int64),
                       0, resolution - 1)
        rows = np.clip((buf.uv[m, 1] * resolution).astype(np.int64),
                       0, resolution - 1)
        flat = rows * resolution + cols
        np.add.at(sums[v], flat, np.moveaxis(images[v], 0, -1)[m])
        np.add.at(counts[v], flat, 1.0)

    seen = counts > 0
    means = np.zeros_like(sums)
    means[seen] = sums[seen] / counts[seen][:, None]

    total = 0.0
    n_samples = 0
    for a in range(n_views):
        for b in range(a + 1, n_views):
            both = seen[a] & seen[b]
            if not both.any():
                continue
            diff = np.abs(means[a][both] - means[b][both]).mean(axis=1)
            total += float(diff.sum())
            n_samples += int(both.sum())
    return total / n_samples if n_samples else 0.0


def consistency_metric(texture: np.ndarray, mesh: TexturedMesh, rig: ViewRig,
                       valid_mask: np.ndarray | None = None,
                       resolution: int = 256,
                       buffers: list[ViewBuffers] | None = None) -> float:
    """Render the textured mesh from every rig pose and measure cross-view
    disagreement. Near zero by construction for a shared texture; its job
    is auditing the render/sample chain and contrasting with pre-fusion
    per-view stacks."""
    if valid_mask is not None and not bool(np.asarray(valid_mask).all()):
        raise ValueError("texture has holes; fill before measuring consistency")
    if buffers is None:
        buffers = [rasterize(mesh, pose) for pose in rig.poses]
    images = np.stack([render_textured(b, texture) for b in buffers])
    return view_consistency(images, buffers, resolution=resolution)
