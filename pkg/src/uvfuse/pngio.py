"""PNG import/export helpers.

All in-memory colors live in [-1, 1]. Textures are stored row 0 = v 0
internally and flipped on write/read so the PNG displays conventionally.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image


def to_uint8(values) -> np.ndarray:
    """[-1, 1] floats to uint8."""
    x = (np.asarray(values, dtype=np.float64) + 1.0) * 0.5
    return np.rint(np.clip(x, 0.0, 1.0) * 255.0).astype(np.uint8)


def from_uint8(values) -> np.ndarray:
    """uint8 to [-1, 1] floats."""
    return np.asarray(values, dtype=np.float64) / 255.0 * 2.0 - 1.0


def save_image(path, image) -> Path:
    """Write an RGB image given as (3, H, W) or (H, W, 3) in [-1, 1]."""
    arr = np.asarray(image)
    if arr.ndim == 3 and arr.shape[0] == 3:
        arr = np.moveaxis(arr, 0, -1)
    path = Path(path)
    Image.fromarray(to_uint8(arr), mode="RGB").save(path)
    return path


def save_texture(path, texture) -> Path:
    """Write a (R, R, 3) UV texture in [-1, 1]; v axis is flipped so v=0
    lands at the bottom of the PNG."""
    return save_image(path, np.asarray(texture)[::-1])


def load_texture(path) -> np.ndarray:
    """Read a texture PNG back to (R, R, 3) floats in [-1, 1], undoing
    the v flip applied by save_texture."""
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"))
    return from_uint8(arr[::-1])


def save_gray16(path, values01) -> Path:
    """Write a [0, 1] scalar field as 16-bit grayscale."""
    arr = np.clip(np.asarray(values01, dtype=np.float64), 0.0, 1.0)
    data = np.rint(arr * 65535.0).astype(np.uint16)
    path = Path(path)
    Image.fromarray(data).save(path)
    return path


def save_mask(path, mask) -> Path:
    """Write a boolean mask as an 8-bit black/white PNG."""
    arr = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
    path = Path(path)
    Image.fromarray(arr, mode="L").save(path)
    return path


def load_mask(path) -> np.ndarray:
    """Read a black/white PNG back to a boolean array."""
    with Image.open(path) as im:
        return np.asarray(im.convert("L")) > 127

