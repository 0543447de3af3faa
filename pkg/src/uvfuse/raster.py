"""Software rasterization of a mesh into per-view fusion buffers.

Per pixel we keep everything the UV fusion loop needs: camera distance,
the UV coordinate (perspective-correct), the winning face, and the
alignment score s = max(0, n . v) where v points from the surface to the
camera. Depth/lineart conditioning images for the remote denoiser are
derived from the same buffers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .cameras import CameraPose
from .geometry import TexturedMesh
from . import pngio

DEPTH_EDGE_THRESHOLD = 0.1
NORMAL_EDGE_COS = math.cos(math.radians(25.0))
_Z_NEAR = 1e-9


@dataclass
class ViewBuffers:
    """Rasterization products for one camera view.

    depth:   (H, W) float32 camera-space forward distance (constant for a
             fronto-parallel plane), +inf on background
    normal:  (H, W, 3) float32 camera-space unit normals (z toward camera)
    uv:      (H, W, 2) float32, valid on foreground only
    face_id: (H, W) int32 winning triangle, -1 on background
    mask:    (H, W) bool foreground flag
    score:   (H, W) float32 in [0, 1]
    """

    depth: np.ndarray
    normal: np.ndarray
    uv: np.ndarray
    face_id: np.ndarray
    mask: np.ndarray
    score: np.ndarray
    pose: CameraPose

    @property
    def image_size(self) -> int:
        return int(self.mask.shape[0])


@dataclass
class ConditionImages:
    """ControlNet conditioning inputs derived from a render."""

    depth_image: np.ndarray
    lineart_image: np.ndarray


def rasterize(mesh: TexturedMesh, pose: CameraPose) -> ViewBuffers:
    """Perspective-project and z-buffer every non-degenerate triangle.

    Faces are drawn double-sided; back-facing surfaces score 0 so they
    carry no weight in fusion. Triangles behind the camera are dropped
    whole (meshes are normalized to the unit sphere and cameras sit
    outside it, so partial clipping cannot occur for rig poses).
    """
    size = pose.image_size
    right, true_up, forward = pose.basis()

    keep = ~mesh.degenerate
    face_index = np.nonzero(keep)[0].astype(np.int32)
    tri_world = mesh.corners()[keep]
    normals = mesh.face_normals[keep]

    rel = tri_world - pose.position
    z_view = rel @ forward
    in_front = (z_view > _Z_NEAR).all(axis=1)
    face_index = face_index[in_front]
    tri_world = tri_world[in_front]
    normals = normals[in_front]
    rel = rel[in_front]
    z_view = z_view[in_front]

    tan_half = math.tan(pose.fov_y / 2.0)
    x_ndc = (rel @ right) / (z_view * tan_half)
    y_ndc = (rel @ true_up) / (z_view * tan_half)
    tri_px = np.stack([(x_ndc + 1.0) * 0.5 * size,
                       (1.0 - y_ndc) * 0.5 * size], axis=-1)

    tri_uv = np.ascontiguousarray(mesh.uv_coords[keep][in_front])
    depth, u_buf, v_buf, fid, score = _kernels.rasterize_faces(
        np.ascontiguousarray(tri_px), np.ascontiguousarray(z_view),
        np.ascontiguousarray(tri_world), tri_uv,
        np.ascontiguousarray(normals), face_index,
        np.ascontiguousarray(pose.position), size, size)

    mask = fid >= 0
    cam_normals = np.zeros((size, size, 3), dtype=np.float64)
    if mask.any():
        n_world = mesh.face_normals[fid[mask]]
        cam_normals[mask] = np.stack(
            [n_world @ right, n_world @ true_up, -(n_world @ forward)], axis=-1)

    uv = np.clip(np.stack([u_buf, v_buf], axis=-1), 0.0, 1.0)
    return ViewBuffers(
        depth=depth.astype(np.float32),
        normal=cam_normals.astype(np.float32),
        uv=uv.astype(np.float32),
        face_id=fid,
        mask=mask,
        score=np.minimum(score, 1.0).astype(np.float32),
        pose=pose,
    )


def surface_points(buffers: ViewBuffers) -> np.ndarray:
    """World position of each foreground pixel's surface sample, (H, W, 3).

    Background rows are zero. Reconstructed from the stored forward depth
    along the pixel ray (whose forward component is 1 by construction).
    """
    pose = buffers.pose
    size = pose.image_size
    right, true_up, forward = pose.basis()
    tan_half = math.tan(pose.fov_y / 2.0)
    xs = ((np.arange(size) + 0.5) / size * 2.0 - 1.0) * tan_half
    ys = (1.0 - (np.arange(size) + 0.5) / size * 2.0) * tan_half
    dirs = (xs[None, :, None] * right + ys[:, None, None] * true_up + forward)
    pts = np.zeros((size, size, 3))
    m = buffers.mask
    pts[m] = pose.position + buffers.depth[m, None].astype(np.float64) * dirs[m]
    return pts


def make_condition_images(buffers: ViewBuffers) -> ConditionImages:
    """Disparity-style depth map plus a lineart edge map.

    Depth is inverted and normalized over the foreground (nearest = 1).
    Lineart marks depth or normal discontinuities and the silhouette,
    dilated by one pixel; the background stays exactly zero in both.
    """
    mask = buffers.mask
    size = mask.shape[0]
    depth_img = np.zeros((size, size), dtype=np.float64)
    if mask.any():
        d = buffers.depth.astype(np.float64)
        dmin = d[mask].min()
        dmax = d[mask].max()
        if dmax - dmin < 1e-12:
            depth_img[mask] = 1.0
        else:
            depth_img[mask] = (dmax - d[mask]) / (dmax - dmin)

    edge = np.zeros((size, size), dtype=bool)
    normal = buffers.normal.astype(np.float64)
    for dy, dx in ((-1, 0), (1, 0), (0, -1), (0, 1)):
        here, there = _overlap_slices(size, dy, dx)
        m0 = mask[here]
        m1 = mask[there]
        silhouette = m0 & ~m1
        dd = np.abs(depth_img[here] - depth_img[there]) > DEPTH_EDGE_THRESHOLD
        ndot = (normal[here] * normal[there]).sum(axis=-1) < NORMAL_EDGE_COS
        edge[here] |= m0 & (silhouette | (m1 & (dd | ndot)))

    dilated = edge.copy()
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            here, there = _overlap_slices(size, dy, dx)
            dilated[here] |= edge[there]
    lineart = (dilated & mask).astype(np.float64)

    return ConditionImages(depth_image=depth_img.astype(np.float32),
                           lineart_image=lineart.astype(np.float32))


def _overlap_slices(size, dy, dx):
    """Slice pair (dst, src) so dst[i] aligns with src shifted by (dy, dx)."""
    y0, y1 = max(0, -dy), min(size, size - dy)
    x0, x1 = max(0, -dx), min(size, size - dx)
    return ((slice(y0, y1), slice(x0, x1)),
            (slice(y0 + dy, y1 + dy), slice(x0 + dx, x1 + dx)))


def render_textured(buffers: ViewBuffers, texture: np.ndarray,
                    background: float = 0.0) -> np.ndarray:
    """Sample a (R, R, 3) texture through the view's UV buffer, returning
    a (3, H, W) image in [-1, 1]."""
    size = buffers.image_size
    res = texture.shape[0]
    out = np.full((size, size, 3), background, dtype=np.float64)
    m = buffers.mask
    if m.any():
        xs = buffers.uv[m, 0].astype(np.float64) * res - 0.5
        ys = buffers.uv[m, 1].astype(np.float64) * res - 0.5
        tex = np.ascontiguousarray(texture, dtype=np.float64)
        valid = np.ones((res, res), dtype=bool)
        sampled, _ = _kernels.bilinear_gather(tex, valid, xs, ys)
        out[m] = sampled
    return np.moveaxis(out, -1, 0).astype(np.float32)


def export_buffers_png(buffers: ViewBuffers, out_dir, prefix="view") -> None:
    """Debug dump: depth and score to 16-bit grayscale, normals to RGB."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cond = make_condition_images(buffers)
    pngio.save_gray16(out_dir / f"{prefix}_depth.png", cond.depth_image)
    pngio.save_gray16(out_dir / f"{prefix}_score.png", buffers.score)
    pngio.save_image(out_dir / f"{prefix}_normal.png", buffers.normal)
