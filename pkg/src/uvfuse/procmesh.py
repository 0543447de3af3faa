"""Procedural UV-mapped test meshes, emitted as OBJ text.

Used by the test suite and handy for demo runs:

    python -m uvfuse.procmesh cube /tmp/cube.obj
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

_CUBE_AXES = (
    # (outward normal, tangent1, tangent2) with cross(t1, t2) = normal
    ((1, 0, 0), (0, 0, -1), (0, 1, 0)),
    ((-1, 0, 0), (0, 0, 1), (0, 1, 0)),
    ((0, 1, 0), (1, 0, 0), (0, 0, -1)),
    ((0, -1, 0), (1, 0, 0), (0, 0, 1)),
    ((0, 0, 1), (1, 0, 0), (0, 1, 0)),
    ((0, 0, -1), (-1, 0, 0), (0, 1, 0)),
)


def cube_obj(side: float = 1.0, gutter: float = 0.02) -> str:
    """Axis-aligned cube, 12 triangles, one UV chart per face in a 3x2
    atlas grid. `gutter` insets each chart (fraction of a cell)."""
    lines = ["# generated cube"]
    vert_lines, vt_lines, face_lines = [], [], []
    vcount = 0
    for i, (n, t1, t2) in enumerate(_CUBE_AXES):
        n = np.array(n, dtype=float)
        t1 = np.array(t1, dtype=float)
        t2 = np.array(t2, dtype=float)
        center = n * (side / 2.0)
        corners = [
            center - t1 * side / 2 - t2 * side / 2,
            center + t1 * side / 2 - t2 * side / 2,
            center + t1 * side / 2 + t2 * side / 2,
            center - t1 * side / 2 + t2 * side / 2,
        ]
        cell_u, cell_v = i % 3, i // 3
        u0 = (cell_u + gutter) / 3.0
        u1 = (cell_u + 1 - gutter) / 3.0
        v0 = (cell_v + gutter) / 2.0
        v1 = (cell_v + 1 - gutter) / 2.0
        uvs = [(u0, v0), (u1, v0), (u1, v1), (u0, v1)]
        for c in corners:
            vert_lines.append(f"v {c[0]:.9g} {c[1]:.9g} {c[2]:.9g}")
        for u, v in uvs:
            vt_lines.append(f"vt {u:.9g} {v:.9g}")
        a, b, c, d = vcount + 1, vcount + 2, vcount + 3, vcount + 4
        face_lines.append(f"f {a}/{a} {b}/{b} {c}/{c}")
        face_lines.append(f"f {a}/{a} {c}/{c} {d}/{d}")
        vcount += 4
    return "\n".join(lines + vert_lines + vt_lines + face_lines) + "\n"


def tetrahedron_obj(gutter: float = 0.05) -> str:
    """Regular tetrahedron, 4 triangles, 2x2 UV atlas."""
    s = 1.0 / math.sqrt(3.0)
    verts = np.array([(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)], dtype=float) * s
    faces = [(0, 1, 2), (0, 3, 1), (0, 2, 3), (1, 3, 2)]
    centroid = verts.mean(axis=0)
    lines = ["# generated tetrahedron"]
    for v in verts:
        lines.append(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}")
    vt_lines, face_lines = [], []
    ti = 0
    for i, f in enumerate(faces):
        a, b, c = (verts[j] for j in f)
        n = np.cross(b - a, c - a)
        if np.dot(n, a - centroid) < 0:  # enforce outward winding
            f = (f[0], f[2], f[1])
        cell_u, cell_v = i % 2, i // 2
        u0 = (cell_u + gutter) / 2.0
        u1 = (cell_u + 1 - gutter) / 2.0
        v0 = (cell_v + gutter) / 2.0
        v1 = (cell_v + 1 - gutter) / 2.0
        for u, v in ((u0, v0), (u1, v0), (0.5 * (u0 + u1), v1)):
            vt_lines.append(f"vt {u:.9g} {v:.9g}")
        face_lines.append(
            f"f {f[0] + 1}/{ti + 1} {f[1] + 1}/{ti + 2} {f[2] + 1}/{ti + 3}")
        ti += 3
    return "\n".join(lines + vt_lines + face_lines) + "\n"


def quad_obj(half_size: float = 0.5, z: float = 0.0) -> str:
    """Single quad in the z=`z` plane facing +z, planar UVs."""
    corners = [(-half_size, -half_size), (half_size, -half_size),
               (half_size, half_size), (-half_size, half_size)]
    lines = ["# generated quad"]
    for x, y in corners:
        lines.append(f"v {x:.9g} {y:.9g} {z:.9g}")
    for u, v in ((0, 0), (1, 0), (1, 1), (0, 1)):
        lines.append(f"vt {u} {v}")
    lines.append("f 1/1 2/2 3/3")
    lines.append("f 1/1 3/3 4/4")
    return "\n".join(lines) + "\n"


def uv_sphere_obj(n_lat: int = 12, n_lon: int = 24) -> str:
    """Lat-long sphere with the standard equirectangular atlas. Corners are
    not shared so the seam keeps clean per-face UVs."""
    lines = ["# generated uv sphere"]
    vert_lines, vt_lines, face_lines = [], [], []
    count = 0

    def point(i, j):
        theta = math.pi * i / n_lat            #  0 .. pi from south pole
        phi = 2.0 * math.pi * j / n_lon
        x = math.sin(theta) * math.cos(phi)
        z = math.sin(theta) * math.sin(phi)
        y = -math.cos(theta)
        return (x, y, z), (j / n_lon, i / n_lat)

    def emit(tri):
        nonlocal count
        idx = []
        for p, uv in tri:
            vert_lines.append(f"v {p[0]:.9g} {p[1]:.9g} {p[2]:.9g}")
            vt_lines.append(f"vt {uv[0]:.9g} {uv[1]:.9g}")
            count += 1
            idx.append(count)
        face_lines.append(f"f {idx[0]}/{idx[0]} {idx[1]}/{idx[1]} {idx[2]}/{idx[2]}")

    for i in range(n_lat):
        for j in range(n_lon):
            p00 = point(i, j)
            p01 = point(i, j + 1)
            p10 = point(i + 1, j)
            p11 = point(i + 1, j + 1)
            if i > 0:
                emit((p00, p11, p01))
            if i < n_lat - 1:
                emit((p00, p10, p11))
    return "\n".join(lines + vert_lines + vt_lines + face_lines) + "\n"


_BUILDERS = {
    "cube": cube_obj,
    "tetrahedron": tetrahedron_obj,
    "quad": quad_obj,
    "sphere": uv_sphere_obj,
}


def write_obj(kind: str, path, **kwargs) -> Path:
    path = Path(path)
    path.write_text(_BUILDERS[kind](**kwargs), encoding="utf-8")
    return path


if __name__ == "__main__":
    import argparse

    ap = argparse.ArgumentParser(description="write a procedural test mesh")
    ap.add_argument("kind", choices=sorted(_BUILDERS))
    ap.add_argument("out")
    args = ap.parse_args()
    write_obj(args.kind, args.out)
    print(f"wrote {args.kind} mesh to {args.out}")
