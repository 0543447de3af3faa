import base64
import hashlib
import json
import struct
from pathlib import Path

import numpy as np
import pytest

from uvfuse import wire

GOLDEN = Path(__file__).parent / "golden" / "tensor_v1.json"


def golden_values():
    return (np.sin(np.arange(96, dtype=np.float64)) * 2.5).astype(
        np.float32).reshape(2, 3, 4, 4)


class TestTensorCodec:
    def test_round_trip(self):
        rng = np.random.default_rng(0)
        arr = rng.standard_normal((3, 4, 16, 16)).astype(np.float32)
        back = wire.decode_tensor(wire.encode_tensor(arr))
        np.testing.assert_array_equal(back, arr)

    def test_row_major_little_endian_layout(self):
        arr = np.arange(6, dtype=np.float32).reshape(2, 3)
        raw = base64.b64decode(wire.encode_tensor(arr)["data"])
        want = b"".join(struct.pack("<f", v) for v in [0, 1, 2, 3, 4, 5])
        assert raw == want

    def test_shape_check(self):
        obj = wire.encode_tensor(np.zeros((2, 2), dtype=np.float32))
        with pytest.raises(ValueError, match="shape"):
            wire.decode_tensor(obj, expect_shape=(2, 3))

    def test_payload_size_check(self):
        obj = wire.encode_tensor(np.zeros(4, dtype=np.float32))
        obj["shape"] = [5]
        with pytest.raises(ValueError, match="bytes"):
            wire.decode_tensor(obj)

    def test_dtype_check(self):
        obj = wire.encode_tensor(np.zeros(4, dtype=np.float32))
        obj["dtype"] = "float64"
        with pytest.raises(ValueError, match="dtype"):
            wire.decode_tensor(obj)

    def test_float64_input_is_cast(self):
        arr = np.array([0.1, 0.2], dtype=np.float64)
        back = wire.decode_tensor(wire.encode_tensor(arr))
        np.testing.assert_array_equal(back, arr.astype(np.float32))


class TestGoldenFile:
    def test_encoding_matches_golden_bytes(self):
        golden = json.loads(GOLDEN.read_text())
        got = wire.encode_tensor(golden_values())
        assert got == golden["tensor"]

    def test_golden_decodes_to_reference_values(self):
        golden = json.loads(GOLDEN.read_text())
        back = wire.decode_tensor(golden["tensor"])
        np.testing.assert_array_equal(back, golden_values())

    def test_golden_checksum(self):
        golden = json.loads(GOLDEN.read_text())
        raw = base64.b64decode(golden["tensor"]["data"])
        assert hashlib.sha256(raw).hexdigest() == golden["sha256_raw_bytes"]
