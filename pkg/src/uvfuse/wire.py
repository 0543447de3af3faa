"""Tensor payloads for the denoiser service protocol.

Tensors travel as JSON objects holding base64 little-endian float32
bytes in row-major (C) order, channels-first.
"""

from __future__ import annotations

import base64

import numpy as np


def encode_tensor(array) -> dict:
    arr = np.ascontiguousarray(array, dtype="<f4")
    return {
        "dtype": "float32",
        "shape": list(arr.shape),
        "data": base64.b64encode(arr.tobytes(order="C")).decode("ascii"),
    }


def decode_tensor(obj, expect_shape=None) -> np.ndarray:
    if obj.get("dtype") != "float32":
        raise ValueError(f"unsupported tensor dtype {obj.get('dtype')!r}")
    shape = tuple(int(s) for s in obj["shape"])
    raw = base64.b64decode(obj["data"])
    expected_bytes = int(np.prod(shape)) * 4 if shape else 4
    if len(raw) != expected_bytes:
        raise ValueError(
            f"tensor payload holds {len(raw)} bytes, shape {shape} needs "
            f"{expected_bytes}")
    arr = np.frombuffer(raw, dtype="<f4").reshape(shape)
    if expect_shape is not None and tuple(expect_shape) != shape:
        raise ValueError(f"expected tensor shape {tuple(expect_shape)}, got {shape}")
    return arr.copy()
