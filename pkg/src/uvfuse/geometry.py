"""UV-mapped triangle meshes: OBJ loading, validation, normals and areas.

Meshes are normalized at load time (centered on the bounding-box center,
scaled to a unit bounding sphere) so camera radii and depth ranges have a
fixed meaning downstream.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateMeshError, MeshParseError, MissingUVError

DEGENERATE_AREA = 1e-12


@dataclass
class TexturedMesh:
    """Triangle mesh with per-corner UVs and per-face derived geometry.

    vertices:     (N, 3) float64 positions, model units
    triangles:    (F, 3) int32 vertex indices
    uv_coords:    (F, 3, 2) float64 per-corner UVs in [0, 1]^2
    face_normals: (F, 3) float64 unit normals (zero for degenerate faces)
    face_areas:   (F,) float64 nonnegative areas
    degenerate:   (F,) bool flag for near-zero-area faces
    """

    vertices: np.ndarray
    triangles: np.ndarray
    uv_coords: np.ndarray
    face_normals: np.ndarray
    face_areas: np.ndarray
    degenerate: np.ndarray

    @property
    def n_faces(self) -> int:
        return int(self.triangles.shape[0])

    def corners(self) -> np.ndarray:
        """World positions of every triangle corner, shape (F, 3, 3)."""
        return self.vertices[self.triangles]


def compute_face_normal_area(v0, v1, v2):
    """Unit normal and area of one triangle.

    Returns (normal, area, degenerate). Degenerate triangles
    (area < 1e-12) come back flagged with a zero normal and zero area
    instead of raising.
    """
    v0 = np.asarray(v0, dtype=np.float64)
    cross = np.cross(np.asarray(v1, dtype=np.float64) - v0,
                     np.asarray(v2, dtype=np.float64) - v0)
    norm = float(np.linalg.norm(cross))
    area = 0.5 * norm
    if area < DEGENERATE_AREA:
        return np.zeros(3), 0.0, True
    return cross / norm, area, False


def face_normals_areas(vertices: np.ndarray, triangles: np.ndarray):
    """Vectorized normals/areas/degeneracy for all faces at once."""
    tri = vertices[triangles]
    cross = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    norms = np.linalg.norm(cross, axis=1)
    areas = 0.5 * norms
    degenerate = areas < DEGENERATE_AREA
    normals = np.zeros_like(cross)
    ok = ~degenerate
    normals[ok] = cross[ok] / norms[ok, None]
    areas = np.where(degenerate, 0.0, areas)
    return normals, areas, degenerate


def build_mesh(vertices, triangles, uv_coords, normalize: bool = True) -> TexturedMesh:
    """Assemble and validate a TexturedMesh from raw arrays."""
    vertices = np.ascontiguousarray(vertices, dtype=np.float64)
    triangles = np.ascontiguousarray(triangles, dtype=np.int32)
    uv_coords = np.ascontiguousarray(uv_coords, dtype=np.float64)

    if triangles.size and (triangles.min() < 0 or triangles.max() >= len(vertices)):
        raise MeshParseError("triangle vertex index out of range")
    if uv_coords.shape != (len(triangles), 3, 2):
        raise MeshParseError("expected one UV pair per triangle corner")

    if np.any(uv_coords < -1e-6) or np.any(uv_coords > 1 + 1e-6):
        warnings.warn("UV coordinates outside [0,1] were clamped", stacklevel=2)
    uv_coords = np.clip(uv_coords, 0.0, 1.0)

    if normalize:
        lo = vertices.min(axis=0)
        hi = vertices.max(axis=0)
        center = 0.5 * (lo + hi)
        vertices = vertices - center
        radius = float(np.linalg.norm(vertices, axis=1).max())
        if radius <= 0.0:
            raise DegenerateMeshError("mesh collapses to a single point")
        vertices = vertices / radius

    normals, areas, degenerate = face_normals_areas(vertices, triangles)
    if bool(degenerate.all()):
        raise DegenerateMeshError("every face has zero area")

    return TexturedMesh(vertices, triangles, uv_coords, normals, areas, degenerate)


def load_mesh(path) -> TexturedMesh:
    """Load a Wavefront OBJ with `v`, `vt` and `f v/vt` records.

    Polygons are fan-triangulated; any `vn` records in the file are
    ignored (normals are recomputed). The mesh comes back centered with
    bounding-sphere radius 1.
    """
    path = Path(path)
    positions: list[list[float]] = []
    texcoords: list[list[float]] = []
    face_pos: list[list[int]] = []
    face_uv: list[list[int]] = []

    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            kind = tokens[0]
            try:
                if kind == "v":
                    if len(tokens) < 4:
                        raise ValueError("vertex needs 3 coordinates")
                    positions.append([float(t) for t in tokens[1:4]])
                elif kind == "vt":
                    if len(tokens) < 3:
                        raise ValueError("texture coordinate needs 2 components")
                    texcoords.append([float(t) for t in tokens[1:3]])
                elif kind == "f":
                    if len(tokens) < 4:
                        raise ValueError("face needs at least 3 corners")
                    vi, ti = [], []
                    for tok in tokens[1:]:
                        parts = tok.split("/")
                        vi.append(_resolve(int(parts[0]), len(positions)))
                        if len(parts) < 2 or parts[1] == "":
                            ti.append(-1)
                        else:
                            ti.append(_resolve(int(parts[1]), len(texcoords)))
                    face_pos.append(vi)
                    face_uv.append(ti)
                # anything else (vn, o, g, s, usemtl, mtllib, ...) is skipped
            except (ValueError, IndexError) as exc:
                raise MeshParseError(f"{path.name}:{lineno}: {exc}") from exc

    if not face_pos:
        raise MeshParseError(f"{path.name}: no faces found")

    triangles, corner_uv_idx = [], []
    for vi, ti in zip(face_pos, face_uv):
        if any(t < 0 for t in ti):
            raise MissingUVError(f"{path.name}: face without texture coordinates")
        for k in range(1, len(vi) - 1):  # fan triangulation
            triangles.append((vi[0], vi[k], vi[k + 1]))
            corner_uv_idx.append((ti[0], ti[k], ti[k + 1]))

    verts = np.asarray(positions, dtype=np.float64)
    uvs = np.asarray(texcoords, dtype=np.float64)
    tri = np.asarray(triangles, dtype=np.int32)
    uv_idx = np.asarray(corner_uv_idx, dtype=np.int64)
    if uv_idx.size and uv_idx.max() >= len(uvs):
        raise MeshParseError(f"{path.name}: texture coordinate index out of range")
    uv_corners = uvs[uv_idx]

    mesh = build_mesh(verts, tri, uv_corners, normalize=True)
    if _has_uv_overlap(mesh):
        warnings.warn(
            f"{path.name}: overlapping UV charts detected; texel contributions "
            "from distinct surface regions will mix", stacklevel=2)
    return mesh


def _resolve(idx: int, count: int) -> int:
    """1-based OBJ index (possibly negative/relative) to 0-based."""
    if idx > 0:
        return idx - 1
    if idx < 0:
        return count + idx
    raise ValueError("OBJ indices are 1-based; 0 is invalid")


def uv_occupancy(mesh: TexturedMesh, resolution: int) -> np.ndarray:
    """Boolean texel grid: centers covered by any non-degenerate face's UV
    triangle. Row index corresponds to the v axis."""
    return _rasterize_uv(mesh, resolution, strict=False) > 0


def _has_uv_overlap(mesh: TexturedMesh, resolution: int = 128) -> bool:
    counts = _rasterize_uv(mesh, resolution, strict=True)
    return bool((counts > 1).any())


def _rasterize_uv(mesh: TexturedMesh, resolution: int, strict: bool) -> np.ndarray:
    """Count, per texel center, how many UV triangles contain it.

    strict=True tests the open interior only, so triangles that merely
    share a chart edge do not double-count.
    """
    counts = np.zeros((resolution, resolution), dtype=np.int32)
    eps = 1e-9 if strict else -1e-12
    uv = mesh.uv_coords * resolution  # texel-space corners
    for f in range(mesh.n_faces):
        if mesh.degenerate[f]:
            continue
        (x0, y0), (x1, y1), (x2, y2) = uv[f]
        area2 = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
        if abs(area2) < 1e-12:
            continue
        xmin = max(int(np.floor(min(x0, x1, x2))), 0)
        xmax = min(int(np.ceil(max(x0, x1, x2))), resolution - 1)
        ymin = max(int(np.floor(min(y0, y1, y2))), 0)
        ymax = min(int(np.ceil(max(y0, y1, y2))), resolution - 1)
        if xmin > xmax or ymin > ymax:
            continue
        px = np.arange(xmin, xmax + 1, dtype=np.float64) + 0.5
        py = np.arange(ymin, ymax + 1, dtype=np.float64) + 0.5
        px, py = np.meshgrid(px, py)
        lam0 = ((x2 - x1) * (py - y1) - (y2 - y1) * (px - x1)) / area2
        lam1 = ((x0 - x2) * (py - y2) - (y0 - y2) * (px - x2)) / area2
        lam2 = ((x1 - x0) * (py - y0) - (y1 - y0) * (px - x0)) / area2
        inside = (lam0 > eps) & (lam1 > eps) & (lam2 > eps)
        counts[ymin:ymax + 1, xmin:xmax + 1] += inside
    return counts
