"""Mask-aware hole filling for UV textures.

Repeated partial-convolution passes: an invalid texel bordered by valid
ones takes the mean of its valid 8-neighbors (the 1/9 box kernel
renormalized by the mask) and becomes valid; passes repeat until no
reachable hole remains. Valid texels are never rewritten.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels


@dataclass
class MaskedTexture:
    texture: np.ndarray   # (R, R, 3)
    valid: np.ndarray     # (R, R) bool


def fill_holes(masked: MaskedTexture, background: float = 0.0) -> np.ndarray:
    """Fill every hole reachable from valid texels; islands with no valid
    neighbor anywhere get the flat background color."""
    texture, _ = fill_holes_with_mask(masked, background)
    return texture


def fill_holes_with_mask(masked: MaskedTexture, background: float = 0.0):
    """fill_holes plus the final validity mask (False only on unreachable
    islands, which were set to the background color)."""
    valid = np.asarray(masked.valid, dtype=bool)
    if not valid.any():
        raise ValueError("texture has no valid texels to fill from")
    values = np.asarray(masked.texture, dtype=np.float64).copy()

    while True:
        values, valid, filled = _kernels.inpaint_pass(values, valid)
        if filled == 0:
            break

    values[~valid] = background
    return values, valid
