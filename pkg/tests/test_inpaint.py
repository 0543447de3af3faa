import numpy as np
import pytest

from uvfuse import inpaint
from uvfuse.inpaint import MaskedTexture


def tex(values):
    """Grayscale helper: (R, R) -> (R, R, 3)."""
    v = np.asarray(values, dtype=np.float64)
    return np.repeat(v[..., None], 3, axis=-1)


class TestSingleHole:
    def test_fill_is_neighbor_mean_exactly(self):
        # eight neighbors carry 0.1..0.8; the hole value itself is junk
        ring = np.array([[0.1, 0.2, 0.3], [0.4, 9.9, 0.5], [0.6, 0.7, 0.8]])
        values = tex(ring)
        valid = np.ones((3, 3), dtype=bool)
        valid[1, 1] = False
        out = inpaint.fill_holes(MaskedTexture(values, valid))
        # mean of the 8 neighbors summed in canonical offset order
        acc = 0.0
        for y, x in ((0, 0), (0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1), (2, 2)):
            acc += values[y, x, 0]
        expected = acc / 8.0
        assert out[1, 1, 0] == expected
        assert out[1, 1, 0] == pytest.approx(0.45, abs=1e-12)

    def test_single_valid_neighbor(self):
        values = tex(np.zeros((3, 3)))
        values[0, 0] = 0.7
        valid = np.zeros((3, 3), dtype=bool)
        valid[0, 0] = True
        out = inpaint.fill_holes(MaskedTexture(values, valid))
        assert out[1, 1, 0] == pytest.approx(0.7)
        assert out[0, 1, 0] == pytest.approx(0.7)


class TestPreservation:
    def test_valid_texels_bit_preserved(self):
        rng = np.random.default_rng(0)
        values = rng.uniform(-1, 1, (16, 16, 3))
        valid = rng.uniform(size=(16, 16)) > 0.4
        valid[0, 0] = True
        out = inpaint.fill_holes(MaskedTexture(values, valid))
        np.testing.assert_array_equal(out[valid], values[valid])

    def test_idempotent_on_hole_free(self):
        rng = np.random.default_rng(1)
        values = rng.uniform(-1, 1, (8, 8, 3))
        valid = np.ones((8, 8), dtype=bool)
        out = inpaint.fill_holes(MaskedTexture(values, valid))
        np.testing.assert_array_equal(out, values)

    def test_idempotent_after_filling(self):
        rng = np.random.default_rng(2)
        values = rng.uniform(-1, 1, (20, 20, 3))
        valid = rng.uniform(size=(20, 20)) > 0.5
        valid[10, 10] = True
        once = inpaint.fill_holes(MaskedTexture(values, valid))
        twice = inpaint.fill_holes(
            MaskedTexture(once, np.ones((20, 20), dtype=bool)))
        np.testing.assert_array_equal(once, twice)

    def test_range_preservation(self):
        rng = np.random.default_rng(3)
        values = rng.uniform(0.2, 0.8, (24, 24, 3))
        valid = rng.uniform(size=(24, 24)) > 0.6
        valid[0, :] = True  # ensure every hole is reachable
        out = inpaint.fill_holes(MaskedTexture(values, valid))
        assert out.min() >= values[valid].min() - 1e-12
        assert out.max() <= values[valid].max() + 1e-12


class TestIterativeFilling:
    def test_wide_gap_converges(self):
        values = tex(np.zeros((11, 11)))
        values[:, 0] = -1.0
        values[:, 10] = 1.0
        valid = np.zeros((11, 11), dtype=bool)
        valid[:, 0] = True
        valid[:, 10] = True
        out, final_valid = inpaint.fill_holes_with_mask(
            MaskedTexture(values, valid))
        assert final_valid.all()
        # interior interpolates monotonically between the rails
        mid_row = out[5, :, 0]
        assert (np.diff(mid_row) >= -1e-9).all()

    def test_island_gets_background(self):
        # valid texels confined to one corner; an isolated region still
        # reachable via 8-connectivity gets filled, everything is reachable
        # on a full grid, so carve reachability with a full-invalid border
        # is impossible; instead verify the all-invalid error and the
        # background default through a fully-propagating fill
        values = tex(np.zeros((6, 6)))
        valid = np.zeros((6, 6), dtype=bool)
        valid[0, 0] = True
        values[0, 0] = 0.5
        out, final_valid = inpaint.fill_holes_with_mask(
            MaskedTexture(values, valid))
        assert final_valid.all()
        np.testing.assert_allclose(out, 0.5)

    def test_all_invalid_raises(self):
        with pytest.raises(ValueError):
            inpaint.fill_holes(
                MaskedTexture(tex(np.zeros((4, 4))), np.zeros((4, 4), bool)))


class TestBackendParity:
    def test_backends_agree(self, kernel_backend):
        rng = np.random.default_rng(4)
        values = rng.uniform(-1, 1, (32, 32, 3))
        valid = rng.uniform(size=(32, 32)) > 0.5
        valid[3, 3] = True
        out = inpaint.fill_holes(MaskedTexture(values, valid))
        # compare against the numpy backend explicitly
        from uvfuse import _kernels

        prev = _kernels.set_backend("numpy")
        try:
            want = inpaint.fill_holes(MaskedTexture(values, valid))
        finally:
            _kernels.set_backend(prev)
        np.testing.assert_array_equal(out, want)
