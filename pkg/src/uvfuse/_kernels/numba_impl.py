"""Numba kernel backend: the numpy_impl arithmetic as @njit scalar loops."""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _rasterize(tri_px, tri_z, tri_world, tri_uv, tri_normal, face_index,
               cam_pos, depth, u_buf, v_buf, fid, score):
    height, width = depth.shape
    for f in range(tri_px.shape[0]):
        x0, y0 = tri_px[f, 0, 0], tri_px[f, 0, 1]
        x1, y1 = tri_px[f, 1, 0], tri_px[f, 1, 1]
        x2, y2 = tri_px[f, 2, 0], tri_px[f, 2, 1]
        area2 = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
        if abs(area2) < 1e-12:
            continue

        xmin = max(int(math.floor(min(x0, min(x1, x2)))), 0)
        xmax = min(int(math.ceil(max(x0, max(x1, x2)))), width - 1)
        ymin = max(int(math.floor(min(y0, min(y1, y2)))), 0)
        ymax = min(int(math.ceil(max(y0, max(y1, y2)))), height - 1)
        if xmin > xmax or ymin > ymax:
            continue

        iz0 = 1.0 / tri_z[f, 0]
        iz1 = 1.0 / tri_z[f, 1]
        iz2 = 1.0 / tri_z[f, 2]

        for iy in range(ymin, ymax + 1):
            py = iy + 0.5
            for ix in range(xmin, xmax + 1):
                px = ix + 0.5
                lam0 = ((x2 - x1) * (py - y1) - (y2 - y1) * (px - x1)) / area2
                lam1 = ((x0 - x2) * (py - y2) - (y0 - y2) * (px - x2)) / area2
                lam2 = ((x1 - x0) * (py - y0) - (y1 - y0) * (px - x0)) / area2
                if lam0 < 0.0 or lam1 < 0.0 or lam2 < 0.0:
                    continue
                denom = lam0 * iz0 + lam1 * iz1 + lam2 * iz2
                z_px = 1.0 / denom  # perspective-correct camera-space z
                if z_px >= depth[iy, ix]:
                    continue
                mu0 = lam0 * iz0 / denom
                mu1 = lam1 * iz1 / denom
                mu2 = lam2 * iz2 / denom
                wx = mu0 * tri_world[f, 0, 0] + mu1 * tri_world[f, 1, 0] + mu2 * tri_world[f, 2, 0]
                wy = mu0 * tri_world[f, 0, 1] + mu1 * tri_world[f, 1, 1] + mu2 * tri_world[f, 2, 1]
                wz = mu0 * tri_world[f, 0, 2] + mu1 * tri_world[f, 1, 2] + mu2 * tri_world[f, 2, 2]
                dx = cam_pos[0] - wx
                dy = cam_pos[1] - wy
                dz = cam_pos[2] - wz
                dist = math.sqrt(dx * dx + dy * dy + dz * dz)
                uu = mu0 * tri_uv[f, 0, 0] + mu1 * tri_uv[f, 1, 0] + mu2 * tri_uv[f, 2, 0]
                vv = mu0 * tri_uv[f, 0, 1] + mu1 * tri_uv[f, 1, 1] + mu2 * tri_uv[f, 2, 1]
                sc = (tri_normal[f, 0] * dx + tri_normal[f, 1] * dy + tri_normal[f, 2] * dz) / dist
                depth[iy, ix] = z_px
                u_buf[iy, ix] = uu
                v_buf[iy, ix] = vv
                fid[iy, ix] = face_index[f]
                score[iy, ix] = max(0.0, sc)


def rasterize_faces(tri_px, tri_z, tri_world, tri_uv, tri_normal, face_index,
                    cam_pos, height, width):
    depth = np.full((height, width), np.inf, dtype=np.float64)
    u_buf = np.zeros((height, width), dtype=np.float64)
    v_buf = np.zeros((height, width), dtype=np.float64)
    fid = np.full((height, width), -1, dtype=np.int32)
    score = np.zeros((height, width), dtype=np.float64)
    _rasterize(tri_px, tri_z, tri_world, tri_uv, tri_normal, face_index,
               cam_pos, depth, u_buf, v_buf, fid, score)
    return depth, u_buf, v_buf, fid, score


@njit(cache=True)
def _splat(colors, us, vs, scores, resolution, wsum, wtot):
    for i in range(us.shape[0]):
        col = int(us[i] * resolution)
        if col < 0:
            col = 0
        elif col > resolution - 1:
            col = resolution - 1
        row = int(vs[i] * resolution)
        if row < 0:
            row = 0
        elif row > resolution - 1:
            row = resolution - 1
        w = math.exp(scores[i])
        wtot[row, col] += w
        wsum[row, col, 0] += w * colors[i, 0]
        wsum[row, col, 1] += w * colors[i, 1]
        wsum[row, col, 2] += w * colors[i, 2]


def splat_points(colors, us, vs, scores, resolution):
    wsum = np.zeros((resolution, resolution, 3), dtype=np.float64)
    wtot = np.zeros((resolution, resolution), dtype=np.float64)
    if us.size:
        _splat(colors, us, vs, scores, resolution, wsum, wtot)
    return wsum, wtot


@njit(cache=True)
def _nearest_fill(values, covered, offsets, filled, ok):
    res = values.shape[0]
    for y in range(res):
        for x in range(res):
            if covered[y, x]:
                continue
            for k in range(offsets.shape[0]):
                sy = y + offsets[k, 0]
                sx = x + offsets[k, 1]
                if sy < 0 or sy >= res or sx < 0 or sx >= res:
                    continue
                if covered[sy, sx]:
                    filled[y, x, 0] = values[sy, sx, 0]
                    filled[y, x, 1] = values[sy, sx, 1]
                    filled[y, x, 2] = values[sy, sx, 2]
                    ok[y, x] = True
                    break


def nearest_fill(values, covered, offsets):
    filled = values.copy()
    ok = covered.copy()
    _nearest_fill(values, covered, offsets, filled, ok)
    return filled, ok


@njit(cache=True)
def _bilinear_gather(texture, valid, xs, ys, out, ok):
    res_y, res_x = texture.shape[:2]
    x_hi = max(res_x - 2, 0)
    y_hi = max(res_y - 2, 0)
    for i in range(xs.shape[0]):
        xc = min(max(xs[i], 0.0), float(res_x - 1))
        yc = min(max(ys[i], 0.0), float(res_y - 1))
        x0 = min(int(xc), x_hi)
        y0 = min(int(yc), y_hi)
        x1 = min(x0 + 1, res_x - 1)
        y1 = min(y0 + 1, res_y - 1)
        fx = xc - x0
        fy = yc - y0
        w00 = (1.0 - fy) * (1.0 - fx)
        w01 = (1.0 - fy) * fx
        w10 = fy * (1.0 - fx)
        w11 = fy * fx
        for c in range(texture.shape[2]):
            out[i, c] = (w00 * texture[y0, x0, c] + w01 * texture[y0, x1, c]
                         + w10 * texture[y1, x0, c] + w11 * texture[y1, x1, c])
        ok[i] = valid[y0, x0] and valid[y0, x1] and valid[y1, x0] and valid[y1, x1]


def bilinear_gather(texture, valid, xs, ys):
    out = np.empty((xs.shape[0], texture.shape[2]), dtype=np.float64)
    ok = np.empty(xs.shape[0], dtype=np.bool_)
    _bilinear_gather(texture, valid, xs, ys, out, ok)
    return out, ok


@njit(cache=True)
def _inpaint_pass(values, valid, new_values, new_valid):
    res_y, res_x = valid.shape
    filled = 0
    for y in range(res_y):
        for x in range(res_x):
            if valid[y, x]:
                continue
            s0 = 0.0
            s1 = 0.0
            s2 = 0.0
            cnt = 0.0
            for dy in range(-1, 2):
                for dx in range(-1, 2):
                    if dy == 0 and dx == 0:
                        continue
                    sy = y + dy
                    sx = x + dx
                    if sy < 0 or sy >= res_y or sx < 0 or sx >= res_x:
                        continue
                    if valid[sy, sx]:
                        s0 += values[sy, sx, 0]
                        s1 += values[sy, sx, 1]
                        s2 += values[sy, sx, 2]
                        cnt += 1.0
            if cnt > 0.0:
                new_values[y, x, 0] = s0 / cnt
                new_values[y, x, 1] = s1 / cnt
                new_values[y, x, 2] = s2 / cnt
                new_valid[y, x] = True
                filled += 1
    return filled


def inpaint_pass(values, valid):
    new_values = values.copy()
    new_valid = valid.copy()
    filled = _inpaint_pass(values, valid, new_values, new_valid)
    return new_values, new_valid, int(filled)
