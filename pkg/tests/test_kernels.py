"""Cross-backend equivalence and the backend selection flag."""

import os
import subprocess
import sys

import numpy as np
import pytest

from uvfuse import _kernels
from uvfuse._kernels import numba_impl, numpy_impl


@pytest.fixture(scope="module")
def raster_inputs():
    rng = np.random.default_rng(0)
    n = 40
    tri_world = rng.uniform(-1, 1, (n, 3, 3))
    cam = np.array([0.0, 0.0, 4.0])
    rel = tri_world - cam
    z = -rel[..., 2]
    keep = (z > 0.1).all(axis=1)
    tri_world = tri_world[keep]
    rel = rel[keep]
    z = z[keep]
    size = 48
    px = np.stack([(rel[..., 0] / (z * 0.5) + 1) * 0.5 * size,
                   (1 - rel[..., 1] / (z * 0.5)) * 0.5 * size], axis=-1)
    uv = rng.uniform(0, 1, (len(z), 3, 2))
    normals = rng.standard_normal((len(z), 3))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    fidx = np.arange(len(z), dtype=np.int32)
    return px, z, tri_world, uv, normals, fidx, cam, size


def test_rasterize_backends_bit_identical(raster_inputs):
    px, z, w, uv, nrm, fidx, cam, size = raster_inputs
    a = numba_impl.rasterize_faces(px, z, w, uv, nrm, fidx, cam, size, size)
    b = numpy_impl.rasterize_faces(px, z, w, uv, nrm, fidx, cam, size, size)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)


def test_splat_backends_agree_to_an_ulp():
    # libm exp (numba) and numpy's SIMD exp may differ in the last bit,
    # so the splat is the one kernel compared with a relative tolerance
    rng = np.random.default_rng(1)
    n = 5000
    colors = rng.uniform(-1, 1, (n, 3))
    us = rng.uniform(0, 1, n)
    vs = rng.uniform(0, 1, n)
    scores = rng.uniform(0, 1, n)
    a = numba_impl.splat_points(colors, us, vs, scores, 64)
    b = numpy_impl.splat_points(colors, us, vs, scores, 64)
    np.testing.assert_allclose(a[0], b[0], rtol=1e-13, atol=1e-15)
    np.testing.assert_allclose(a[1], b[1], rtol=1e-13)


def test_nearest_fill_backends_bit_identical():
    rng = np.random.default_rng(2)
    values = rng.uniform(-1, 1, (40, 40, 3))
    covered = rng.uniform(size=(40, 40)) > 0.6
    offsets = _kernels._fill_offsets(3)
    a = numba_impl.nearest_fill(values, covered, offsets)
    b = numpy_impl.nearest_fill(values, covered, offsets)
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])


def test_bilinear_gather_backends_bit_identical():
    rng = np.random.default_rng(3)
    tex = rng.uniform(-1, 1, (32, 32, 3))
    valid = rng.uniform(size=(32, 32)) > 0.2
    xs = rng.uniform(-2, 34, 4000)
    ys = rng.uniform(-2, 34, 4000)
    a = numba_impl.bilinear_gather(tex, valid, xs, ys)
    b = numpy_impl.bilinear_gather(tex, valid, xs, ys)
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])


def test_inpaint_pass_backends_bit_identical():
    rng = np.random.default_rng(4)
    values = rng.uniform(-1, 1, (30, 30, 3))
    valid = rng.uniform(size=(30, 30)) > 0.5
    a = numba_impl.inpaint_pass(values, valid)
    b = numpy_impl.inpaint_pass(values, valid)
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])
    assert a[2] == b[2]


def test_env_flag_selects_backend():
    code = ("from uvfuse import _kernels; print(_kernels.backend_name())")
    env = dict(os.environ, UVFUSE_BACKEND="numpy")
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_unknown_env_backend_fails():
    code = "import uvfuse._kernels"
    env = dict(os.environ, UVFUSE_BACKEND="cuda")
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True)
    assert out.returncode != 0
    assert "UVFUSE_BACKEND" in out.stderr


def test_set_backend_rejects_unknown():
    with pytest.raises(ValueError):
        _kernels.set_backend("gpu")
