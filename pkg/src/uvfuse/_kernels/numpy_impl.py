"""Pure-numpy kernel backend.

Vectorized over pixels/texels but with the same per-element operation
order as the numba backend, so both produce identical bits.
"""

from __future__ import annotations

import numpy as np


def rasterize_faces(tri_px, tri_z, tri_world, tri_uv, tri_normal, face_index,
                    cam_pos, height, width):
    depth = np.full((height, width), np.inf, dtype=np.float64)
    u_buf = np.zeros((height, width), dtype=np.float64)
    v_buf = np.zeros((height, width), dtype=np.float64)
    fid = np.full((height, width), -1, dtype=np.int32)
    score = np.zeros((height, width), dtype=np.float64)

    for f in range(tri_px.shape[0]):
        x0, y0 = tri_px[f, 0]
        x1, y1 = tri_px[f, 1]
        x2, y2 = tri_px[f, 2]
        area2 = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
        if abs(area2) < 1e-12:
            continue

        xmin = max(int(np.floor(min(x0, x1, x2))), 0)
        xmax = min(int(np.ceil(max(x0, x1, x2))), width - 1)
        ymin = max(int(np.floor(min(y0, y1, y2))), 0)
        ymax = min(int(np.ceil(max(y0, y1, y2))), height - 1)
        if xmin > xmax or ymin > ymax:
            continue

        px = np.arange(xmin, xmax + 1, dtype=np.float64) + 0.5
        py = np.arange(ymin, ymax + 1, dtype=np.float64) + 0.5
        px, py = np.meshgrid(px, py)

        lam0 = ((x2 - x1) * (py - y1) - (y2 - y1) * (px - x1)) / area2
        lam1 = ((x0 - x2) * (py - y2) - (y0 - y2) * (px - x2)) / area2
        lam2 = ((x1 - x0) * (py - y0) - (y1 - y0) * (px - x0)) / area2
        inside = (lam0 >= 0.0) & (lam1 >= 0.0) & (lam2 >= 0.0)
        if not inside.any():
            continue

        iz0 = 1.0 / tri_z[f, 0]
        iz1 = 1.0 / tri_z[f, 1]
        iz2 = 1.0 / tri_z[f, 2]
        denom = lam0 * iz0 + lam1 * iz1 + lam2 * iz2
        mu0 = lam0 * iz0 / denom
        mu1 = lam1 * iz1 / denom
        mu2 = lam2 * iz2 / denom

        z_px = 1.0 / denom  # perspective-correct camera-space z

        sub = (slice(ymin, ymax + 1), slice(xmin, xmax + 1))
        win = inside & (z_px < depth[sub])
        if not win.any():
            continue

        wx = mu0 * tri_world[f, 0, 0] + mu1 * tri_world[f, 1, 0] + mu2 * tri_world[f, 2, 0]
        wy = mu0 * tri_world[f, 0, 1] + mu1 * tri_world[f, 1, 1] + mu2 * tri_world[f, 2, 1]
        wz = mu0 * tri_world[f, 0, 2] + mu1 * tri_world[f, 1, 2] + mu2 * tri_world[f, 2, 2]
        dx = cam_pos[0] - wx
        dy = cam_pos[1] - wy
        dz = cam_pos[2] - wz
        dist = np.sqrt(dx * dx + dy * dy + dz * dz)

        uu = mu0 * tri_uv[f, 0, 0] + mu1 * tri_uv[f, 1, 0] + mu2 * tri_uv[f, 2, 0]
        vv = mu0 * tri_uv[f, 0, 1] + mu1 * tri_uv[f, 1, 1] + mu2 * tri_uv[f, 2, 1]
        sc = (tri_normal[f, 0] * dx + tri_normal[f, 1] * dy + tri_normal[f, 2] * dz) / dist

        depth[sub][win] = z_px[win]
        u_buf[sub][win] = uu[win]
        v_buf[sub][win] = vv[win]
        fid[sub][win] = face_index[f]
        score[sub][win] = np.maximum(0.0, sc[win])

    return depth, u_buf, v_buf, fid, score


def splat_points(colors, us, vs, scores, resolution):
    wsum = np.zeros((resolution, resolution, 3), dtype=np.float64)
    wtot = np.zeros((resolution, resolution), dtype=np.float64)
    if us.size == 0:
        return wsum, wtot

    col = np.clip((us * resolution).astype(np.int64), 0, resolution - 1)
    row = np.clip((vs * resolution).astype(np.int64), 0, resolution - 1)
    w = np.exp(scores)
    flat = row * resolution + col
    # ufunc.at is unbuffered: adds land in input order, matching the
    # sequential numba loop bit-for-bit.
    np.add.at(wtot.reshape(-1), flat, w)
    wc = wsum.reshape(-1, 3)
    for c in range(3):
        np.add.at(wc[:, c], flat, w * colors[:, c])
    return wsum, wtot


def nearest_fill(values, covered, offsets):
    res = values.shape[0]
    filled = values.copy()
    ok = covered.copy()
    remaining = ~covered
    for dy, dx in offsets:
        if not remaining.any():
            break
        src_cov = np.zeros_like(covered)
        src_val = np.zeros_like(values)
        ys0, ys1 = max(0, -dy), min(res, res - dy)
        xs0, xs1 = max(0, -dx), min(res, res - dx)
        if ys0 >= ys1 or xs0 >= xs1:
            continue
        src_cov[ys0:ys1, xs0:xs1] = covered[ys0 + dy:ys1 + dy, xs0 + dx:xs1 + dx]
        src_val[ys0:ys1, xs0:xs1] = values[ys0 + dy:ys1 + dy, xs0 + dx:xs1 + dx]
        take = remaining & src_cov
        filled[take] = src_val[take]
        ok |= take
        remaining &= ~take
    return filled, ok


def bilinear_gather(texture, valid, xs, ys):
    res_y, res_x = texture.shape[:2]
    xc = np.minimum(np.maximum(xs, 0.0), float(res_x - 1))
    yc = np.minimum(np.maximum(ys, 0.0), float(res_y - 1))
    x0 = np.minimum(xc.astype(np.int64), max(res_x - 2, 0))
    y0 = np.minimum(yc.astype(np.int64), max(res_y - 2, 0))
    x1 = np.minimum(x0 + 1, res_x - 1)
    y1 = np.minimum(y0 + 1, res_y - 1)
    fx = xc - x0
    fy = yc - y0

    t00 = texture[y0, x0]
    t01 = texture[y0, x1]
    t10 = texture[y1, x0]
    t11 = texture[y1, x1]
    w00 = ((1.0 - fy) * (1.0 - fx))[:, None]
    w01 = ((1.0 - fy) * fx)[:, None]
    w10 = (fy * (1.0 - fx))[:, None]
    w11 = (fy * fx)[:, None]
    out = w00 * t00 + w01 * t01 + w10 * t10 + w11 * t11
    ok = valid[y0, x0] & valid[y0, x1] & valid[y1, x0] & valid[y1, x1]
    return out, ok


_NEIGHBOR_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, -1),
                     (0, 1), (1, -1), (1, 0), (1, 1))


def inpaint_pass(values, valid):
    res_y, res_x = valid.shape
    nb_sum = np.zeros_like(values)
    nb_cnt = np.zeros(valid.shape, dtype=np.float64)
    for dy, dx in _NEIGHBOR_OFFSETS:
        ys0, ys1 = max(0, -dy), min(res_y, res_y - dy)
        xs0, xs1 = max(0, -dx), min(res_x, res_x - dx)
        v = valid[ys0 + dy:ys1 + dy, xs0 + dx:xs1 + dx]
        nb_sum[ys0:ys1, xs0:xs1] += values[ys0 + dy:ys1 + dy, xs0 + dx:xs1 + dx] * v[..., None]
        nb_cnt[ys0:ys1, xs0:xs1] += v
    fill = ~valid & (nb_cnt > 0)
    new_values = values.copy()
    new_values[fill] = nb_sum[fill] / nb_cnt[fill][:, None]
    new_valid = valid | fill
    return new_values, new_valid, int(fill.sum())
