"""Hot per-pixel kernels with two interchangeable backends.

The numba backend JIT-compiles scalar loops; the numpy backend runs the
same arithmetic vectorized. Both follow identical operation order so
results agree bit-for-bit. Backend selection:

  * env var ``UVFUSE_BACKEND=numba|numpy`` (read at import), else
  * numba when importable, numpy otherwise.

``set_backend`` switches at runtime (used by tests and the benchmark).
"""

from __future__ import annotations

import os

from . import numpy_impl

_IMPLS = {"numpy": numpy_impl}

try:
    from . import numba_impl

    _IMPLS["numba"] = numba_impl
except ImportError:  # pragma: no cover - numba is a declared dependency
    pass

_env = os.environ.get("UVFUSE_BACKEND", "").strip().lower()
if _env:
    if _env not in _IMPLS:
        raise ImportError(
            f"UVFUSE_BACKEND={_env!r} not available; choices: {sorted(_IMPLS)}"
        )
    _backend = _env
else:
    _backend = "numba" if "numba" in _IMPLS else "numpy"


def available_backends():
    return sorted(_IMPLS)


def backend_name() -> str:
    return _backend


def set_backend(name: str) -> str:
    """Switch the active kernel backend; returns the previous one."""
    global _backend
    if name not in _IMPLS:
        raise ValueError(f"unknown backend {name!r}; choices: {sorted(_IMPLS)}")
    previous = _backend
    _backend = name
    return previous


def rasterize_faces(tri_px, tri_z, tri_world, tri_uv, tri_normal, face_index,
                    cam_pos, height, width):
    """Z-buffered perspective-correct rasterization of pre-projected faces.

    Faces are processed in array order with a strict depth test, so on
    exact depth ties the earlier (lower-id) face keeps the pixel.
    Returns (depth, u, v, face_id, score) full-image buffers.
    """
    return _IMPLS[_backend].rasterize_faces(
        tri_px, tri_z, tri_world, tri_uv, tri_normal, face_index,
        cam_pos, height, width)


def splat_points(colors, us, vs, scores, resolution):
    """Accumulate exp(score)-weighted colors into the nearest texels.

    Accumulation happens in input order; callers flatten pixels as
    (view index, then row-major) to keep runs bit-reproducible.
    """
    return _IMPLS[_backend].splat_points(colors, us, vs, scores, resolution)


def nearest_fill(values, covered, radius):
    """Fill uncovered texels from the nearest covered texel within radius.

    Ties resolve by (distance^2, dy, dx) scan order. Returns the filled
    grid and an ok mask (covered or filled).
    """
    offsets = _fill_offsets(radius)
    return _IMPLS[_backend].nearest_fill(values, covered, offsets)


def bilinear_gather(texture, valid, xs, ys):
    """Sample a texture bilinearly at continuous texel coords (x=col, y=row).

    Border texels clamp. ok[i] is True only when all four corner texels
    are valid.
    """
    return _IMPLS[_backend].bilinear_gather(texture, valid, xs, ys)


def inpaint_pass(values, valid):
    """One synchronous partial-convolution pass: every invalid texel with
    at least one valid 8-neighbor becomes the mean of those neighbors.

    Returns (new_values, new_valid, filled_count).
    """
    return _IMPLS[_backend].inpaint_pass(values, valid)


def _fill_offsets(radius: int):
    import numpy as np

    offs = []
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            if dy == 0 and dx == 0:
                continue
            if dy * dy + dx * dx <= radius * radius:
                offs.append((dy * dy + dx * dx, dy, dx))
    offs.sort()
    return np.array([(dy, dx) for _, dy, dx in offs], dtype=np.int64)
