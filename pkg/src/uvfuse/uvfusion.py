"""UV-space fusion: splat per-view predictions into shared textures,
blend across resolutions, and resample the fused result back into every
view.

Each foreground pixel scatters its color to the nearest texel with
weight e^s (s = view-alignment cosine), so the per-texel average is an
exact softmax over every contributing pixel from every view. Coarser
textures share texels across more pixels and dominate early; weight
shifts to finer textures as denoising progresses.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels

HOLE_FILL_RADIUS = 3
COARSE_HANDOFF = 0.3
FINAL_MID_WEIGHT = 0.4


@dataclass
class UvAccumulator:
    """Per-texel weighted color sums for one texture resolution."""

    resolution: int
    weighted_sum: np.ndarray   # (R, R, 3) float64
    weight_total: np.ndarray   # (R, R) float64

    @property
    def coverage(self) -> np.ndarray:
        return self.weight_total > 0.0

    def fused_values(self) -> np.ndarray:
        """weighted_sum / weight_total where covered, zero elsewhere."""
        out = np.zeros_like(self.weighted_sum)
        cov = self.coverage
        out[cov] = self.weighted_sum[cov] / self.weight_total[cov, None]
        return out


class ScaleWeights(NamedTuple):
    """Blend weights for the (coarse, mid, fine) texture stack; the field
    names reflect the default 128/256/512 resolutions."""

    w128: float
    w256: float
    w512: float


def scale_weights(progress: float) -> ScaleWeights:
    """Multi-scale schedule over denoising progress in [0, 1].

    All weight starts on the coarse texture, transfers linearly to the
    mid texture by progress 0.3, then partially on to the fine texture,
    ending at (0, 0.4, 0.6).
    """
    if not 0.0 <= progress <= 1.0:
        raise ValueError("progress must lie in [0, 1]")
    if progress <= COARSE_HANDOFF:
        ramp = progress / COARSE_HANDOFF
        return ScaleWeights(1.0 - ramp, ramp, 0.0)
    ramp = (progress - COARSE_HANDOFF) / (1.0 - COARSE_HANDOFF)
    fine = (1.0 - FINAL_MID_WEIGHT) * ramp
    return ScaleWeights(0.0, 1.0 - fine, fine)


def splat(view_images: np.ndarray, buffers, resolution: int) -> UvAccumulator:
    """Scatter every foreground pixel of every view into the texture.

    view_images: (V, 3, H, W). Pixels accumulate in canonical order
    (view index, then row-major) so repeated runs are bit-identical.
    """
    colors, us, vs, scores = [], [], [], []
    for v, buf in enumerate(buffers):
        m = buf.mask
        if not m.any():
            continue
        colors.append(np.moveaxis(view_images[v], 0, -1)[m].astype(np.float64))
        us.append(buf.uv[m, 0].astype(np.float64))
        vs.append(buf.uv[m, 1].astype(np.float64))
        scores.append(buf.score[m].astype(np.float64))
    if colors:
        wsum, wtot = _kernels.splat_points(
            np.concatenate(colors), np.concatenate(us),
            np.concatenate(vs), np.concatenate(scores), resolution)
    else:
        wsum = np.zeros((resolution, resolution, 3))
        wtot = np.zeros((resolution, resolution))
    return UvAccumulator(resolution, wsum, wtot)


def _sampling_texture(acc: UvAccumulator):
    """Fused texture prepared for bilinear reads: uncovered texels take
    the nearest covered value within HOLE_FILL_RADIUS; anything farther
    stays invalid."""
    return _kernels.nearest_fill(acc.fused_values(), acc.coverage,
                                 HOLE_FILL_RADIUS)


def unproject(accumulators, weights: ScaleWeights, buffers,
              fallback: np.ndarray) -> np.ndarray:
    """Blend the fused textures back into each view.

    Foreground pixels sample every resolution bilinearly at their UV and
    mix by `weights`, renormalized over the resolutions actually covered
    there (uniform if those all carry zero weight). Background pixels
    pass the per-view fallback through untouched.
    """
    if len(accumulators) != len(weights):
        raise ValueError("one accumulator per scale weight required")
    prepared = [_sampling_texture(acc) for acc in accumulators]
    out = np.array(fallback, dtype=np.float32, copy=True)

    for v, buf in enumerate(buffers):
        m = buf.mask
        if not m.any():
            continue
        us = buf.uv[m, 0].astype(np.float64)
        vs = buf.uv[m, 1].astype(np.float64)
        n_px = us.shape[0]
        blend = np.zeros((n_px, 3))
        wsum = np.zeros(n_px)
        uniform_sum = np.zeros((n_px, 3))
        ok_count = np.zeros(n_px)
        for (tex, ok_tex), acc, w in zip(prepared, accumulators, weights):
            res = acc.resolution
            sampled, ok = _kernels.bilinear_gather(
                tex, ok_tex, us * res - 0.5, vs * res - 0.5)
            okf = ok.astype(np.float64)
            blend += (w * okf)[:, None] * sampled
            wsum += w * okf
            uniform_sum += okf[:, None] * sampled
            ok_count += okf

        result = np.moveaxis(fallback[v], 0, -1)[m].astype(np.float64)
        use_uniform = (wsum <= 0.0) & (ok_count > 0.0)
        have_weight = wsum > 0.0
        result[have_weight] = blend[have_weight] / wsum[have_weight, None]
        result[use_uniform] = (uniform_sum[use_uniform]
                               / ok_count[use_uniform, None])
        view = np.moveaxis(out[v], 0, -1)
        view[m] = result.astype(np.float32)
    return out


def fused_texture(accumulators, weights: ScaleWeights):
    """Composite at the finest resolution: bilinearly upsample each
    scale's fused texture and blend with per-texel renormalization over
    the scales covered there. Returns (texture, hole_mask) where holes
    are texels covered at no scale."""
    if len(accumulators) != len(weights):
        raise ValueError("one accumulator per scale weight required")
    fine_res = max(acc.resolution for acc in accumulators)

    centers = np.arange(fine_res) + 0.5
    blend = np.zeros((fine_res * fine_res, 3))
    wsum = np.zeros(fine_res * fine_res)
    uniform_sum = np.zeros((fine_res * fine_res, 3))
    cov_count = np.zeros(fine_res * fine_res)

    for acc, w in zip(accumulators, weights):
        res = acc.resolution
        scale = res / fine_res
        coords = centers * scale
        xs, ys = np.meshgrid(coords, coords)
        tex, ok_tex = _sampling_texture(acc)
        sampled, _ = _kernels.bilinear_gather(
            tex, ok_tex, xs.ravel() - 0.5, ys.ravel() - 0.5)
        tx = np.minimum(coords.astype(np.int64), res - 1)
        covered = acc.coverage[np.ix_(tx, tx)].ravel().astype(np.float64)
        blend += (w * covered)[:, None] * sampled
        wsum += w * covered
        uniform_sum += covered[:, None] * sampled
        cov_count += covered

    out = np.zeros((fine_res * fine_res, 3))
    have_weight = wsum > 0.0
    out[have_weight] = blend[have_weight] / wsum[have_weight, None]
    use_uniform = (wsum <= 0.0) & (cov_count > 0.0)
    out[use_uniform] = uniform_sum[use_uniform] / cov_count[use_uniform, None]
    hole = cov_count <= 0.0
    return out.reshape(fine_res, fine_res, 3), hole.reshape(fine_res, fine_res)
