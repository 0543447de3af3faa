import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uvfuse import uvfusion
from uvfuse.raster import ViewBuffers
from uvfuse.uvfusion import ScaleWeights


def synthetic_buffers(us, vs, scores, mask=None, size=None):
    """Fabricate one view's buffers from flat pixel arrays."""
    n = len(us)
    if size is None:
        size = int(math.ceil(math.sqrt(n)))
    m = np.zeros((size, size), dtype=bool)
    uv = np.zeros((size, size, 2), dtype=np.float32)
    sc = np.zeros((size, size), dtype=np.float32)
    flat = np.arange(n)
    ys, xs = np.divmod(flat, size)
    if mask is None:
        mask = np.ones(n, dtype=bool)
    m[ys, xs] = mask
    uv[ys, xs, 0] = us
    uv[ys, xs, 1] = vs
    sc[ys, xs] = scores
    return ViewBuffers(
        depth=np.where(m, 1.0, np.inf).astype(np.float32),
        normal=np.zeros((size, size, 3), dtype=np.float32),
        uv=uv, face_id=np.where(m, 0, -1).astype(np.int32),
        mask=m, score=sc, pose=None)


def images_from_colors(colors, size):
    """(P, 3) colors laid out row-major into a (1, 3, size, size) stack."""
    img = np.zeros((3, size, size), dtype=np.float32)
    flat = np.arange(len(colors))
    ys, xs = np.divmod(flat, size)
    img[:, ys, xs] = np.asarray(colors, dtype=np.float32).T
    return img[None]


def brute_force_softmax_fusion(contributions, resolution):
    """Oracle: dict-based accumulation of exp(s)-weighted colors.

    contributions: list of (u, v, score, color) across all views/pixels.
    Inputs pass through float32 first, exactly like buffer storage.
    Returns dict texel -> (fused color, weight list).
    """
    texels = {}
    for u, v, s, color in contributions:
        u = float(np.float32(u))
        v = float(np.float32(v))
        s = float(np.float32(s))
        color = np.asarray(color, dtype=np.float32).astype(np.float64)
        tx = min(int(u * resolution), resolution - 1)
        ty = min(int(v * resolution), resolution - 1)
        texels.setdefault((ty, tx), []).append((math.exp(s), color))
    fused = {}
    for key, items in texels.items():
        wsum = sum(w for w, _ in items)
        color = sum(w * c for w, c in items) / wsum
        fused[key] = (color, [w / wsum for w, _ in items])
    return fused


class TestSplatAgainstOracle:
    def test_random_texels_with_2_to_8_contributors(self):
        rng = np.random.default_rng(0)
        resolution = 100
        n_texels = 10_000  # every texel of the grid exactly once
        views = []
        images = []
        contributions = []
        n_views = 8
        per_view = [[] for _ in range(n_views)]
        for flat in range(n_texels):
            ty, tx = divmod(flat, resolution)
            k = int(rng.integers(2, 9))
            idx = rng.choice(n_views, size=k, replace=False)
            for v in idx:
                u = (tx + rng.uniform(0.05, 0.95)) / resolution
                vv = (ty + rng.uniform(0.05, 0.95)) / resolution
                s = float(rng.uniform(0.0, 1.0))
                color = rng.uniform(-1, 1, 3)
                per_view[v].append((u, vv, s, color))
                contributions.append((u, vv, s, color))
        size = int(math.ceil(math.sqrt(max(len(p) for p in per_view))))
        for v in range(n_views):
            us = np.array([c[0] for c in per_view[v]])
            vs = np.array([c[1] for c in per_view[v]])
            ss = np.array([c[2] for c in per_view[v]])
            cols = np.array([c[3] for c in per_view[v]])
            mask = np.zeros(size * size, dtype=bool)
            mask[:len(us)] = True
            pad = size * size - len(us)
            views.append(synthetic_buffers(
                np.concatenate([us, np.zeros(pad)]),
                np.concatenate([vs, np.zeros(pad)]),
                np.concatenate([ss, np.zeros(pad)]),
                mask=mask, size=size))
            images.append(images_from_colors(
                np.concatenate([cols, np.zeros((pad, 3))]), size)[0])
        acc = uvfusion.splat(np.stack(images), views, resolution)

        oracle = brute_force_softmax_fusion(contributions, resolution)
        fused = acc.fused_values()
        checked = 0
        for (ty, tx), (want_color, weights) in oracle.items():
            np.testing.assert_allclose(fused[ty, tx], want_color, atol=1e-6)
            assert abs(sum(weights) - 1.0) <= 1e-6
            assert all(0.0 < w <= 1.0 for w in weights)
            checked += 1
        assert checked == n_texels

    def test_equal_scores_reduce_to_plain_average(self):
        us = np.array([0.105, 0.101, 0.108])
        vs = np.array([0.204, 0.209, 0.201])
        scores = np.full(3, 0.7)
        colors = np.array([[0.0, -1.0, 1.0], [0.2, 0.4, 0.0], [1.0, 0.0, -1.0]])
        buf = synthetic_buffers(us, vs, scores)
        acc = uvfusion.splat(images_from_colors(colors, buf.mask.shape[0]),
                             [buf], 10)
        np.testing.assert_allclose(acc.fused_values()[2, 1],
                                   colors.mean(axis=0), atol=1e-9)

    def test_two_contributors_closed_form(self):
        # scores (0, ln 3), colors 0 and 1: fused = (0 + 3*1)/4 = 0.75
        us = np.array([0.55, 0.558])
        vs = np.array([0.35, 0.352])
        scores = np.array([0.0, math.log(3.0)])
        colors = np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]])
        buf = synthetic_buffers(us, vs, scores)
        acc = uvfusion.splat(images_from_colors(colors, buf.mask.shape[0]),
                             [buf], 10)
        np.testing.assert_allclose(acc.fused_values()[3, 5], 0.75, atol=1e-12)

    def test_masked_pixels_excluded(self):
        us = np.array([0.5, 0.5])
        vs = np.array([0.5, 0.5])
        scores = np.array([0.3, 0.9])
        colors = np.array([[1.0, 1.0, 1.0], [-1.0, -1.0, -1.0]])
        buf = synthetic_buffers(us, vs, scores, mask=np.array([True, False]))
        acc = uvfusion.splat(images_from_colors(colors, buf.mask.shape[0]),
                             [buf], 4)
        assert acc.coverage.sum() == 1
        np.testing.assert_allclose(acc.fused_values()[2, 2], 1.0)

    def test_score_monotonicity(self):
        """Raising one contributor's score moves the fused color toward it."""
        colors = np.array([[1.0, 1.0, 1.0], [-1.0, -1.0, -1.0]])
        us = np.array([0.5, 0.51])
        vs = np.array([0.5, 0.51])
        prev = None
        for s1 in (0.0, 0.25, 0.5, 0.75, 1.0):
            buf = synthetic_buffers(us, vs, np.array([s1, 0.5]))
            acc = uvfusion.splat(images_from_colors(colors, 2), [buf], 2)
            fused = acc.fused_values()[1, 1, 0]
            if prev is not None:
                assert fused > prev
            prev = fused

    def test_view_permutation_invariance(self):
        rng = np.random.default_rng(4)
        n_views, size, res = 5, 16, 8
        buffers, images = [], []
        for _ in range(n_views):
            us = rng.uniform(0, 1, size * size)
            vs = rng.uniform(0, 1, size * size)
            ss = rng.uniform(0, 1, size * size)
            cols = rng.uniform(-1, 1, (size * size, 3))
            buffers.append(synthetic_buffers(us, vs, ss, size=size))
            images.append(images_from_colors(cols, size)[0])
        images = np.stack(images)
        base = uvfusion.splat(images, buffers, res).fused_values()
        order = rng.permutation(n_views)
        shuffled = uvfusion.splat(images[order], [buffers[i] for i in order],
                                  res).fused_values()
        np.testing.assert_allclose(shuffled, base, atol=1e-5)

    def test_canonical_order_bit_exact(self):
        rng = np.random.default_rng(5)
        us = rng.uniform(0, 1, 64)
        vs = rng.uniform(0, 1, 64)
        ss = rng.uniform(0, 1, 64)
        cols = rng.uniform(-1, 1, (64, 3))
        buf = synthetic_buffers(us, vs, ss, size=8)
        img = images_from_colors(cols, 8)
        a = uvfusion.splat(img, [buf], 4)
        b = uvfusion.splat(img, [buf], 4)
        np.testing.assert_array_equal(a.weighted_sum, b.weighted_sum)
        np.testing.assert_array_equal(a.weight_total, b.weight_total)

    def test_backends_agree(self, kernel_backend):
        rng = np.random.default_rng(6)
        us = rng.uniform(0, 1, 100)
        vs = rng.uniform(0, 1, 100)
        ss = rng.uniform(0, 1, 100)
        cols = rng.uniform(-1, 1, (100, 3))
        buf = synthetic_buffers(us, vs, ss, size=10)
        img = images_from_colors(cols, 10)
        acc = uvfusion.splat(img, [buf], 16)
        oracle = brute_force_softmax_fusion(
            list(zip(us, vs, ss, cols)), 16)
        fused = acc.fused_values()
        for (ty, tx), (want, _) in oracle.items():
            np.testing.assert_allclose(fused[ty, tx], want, atol=1e-9)


class TestCoverageHierarchy:
    def test_coarse_coverage_contains_fine(self):
        rng = np.random.default_rng(7)
        us = rng.uniform(0, 1, 200)
        vs = rng.uniform(0, 1, 200)
        ss = rng.uniform(0, 1, 200)
        cols = rng.uniform(-1, 1, (200, 3))
        size = 15
        buf = synthetic_buffers(us, vs, ss, size=size)
        img = images_from_colors(cols, size)
        fine = uvfusion.splat(img, [buf], 128).coverage
        coarse = uvfusion.splat(img, [buf], 32).coverage
        fy, fx = np.nonzero(fine)
        assert coarse[fy // 4, fx // 4].all()


class TestScaleWeights:
    def test_endpoints_exact(self):
        assert uvfusion.scale_weights(0.0) == (1.0, 0.0, 0.0)
        assert uvfusion.scale_weights(0.3) == (0.0, 1.0, 0.0)
        assert uvfusion.scale_weights(1.0) == (0.0, 0.4, 0.6)

    def test_second_ramp_midpoint(self):
        w = uvfusion.scale_weights(0.65)
        assert w.w128 == 0.0
        assert w.w256 == pytest.approx(0.7, abs=1e-12)
        assert w.w512 == pytest.approx(0.3, abs=1e-12)

    @given(st.floats(0.0, 1.0, allow_nan=False))
    @settings(max_examples=200, deadline=None)
    def test_weights_sum_to_one(self, p):
        w = uvfusion.scale_weights(p)
        assert abs(sum(w) - 1.0) <= 1e-9
        assert all(0.0 <= x <= 1.0 for x in w)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            uvfusion.scale_weights(-0.01)
        with pytest.raises(ValueError):
            uvfusion.scale_weights(1.01)

    def test_continuity_at_handoff(self):
        lo = uvfusion.scale_weights(0.3 - 1e-12)
        hi = uvfusion.scale_weights(0.3 + 1e-12)
        np.testing.assert_allclose(lo, hi, atol=1e-9)


def texel_centered_view(resolution, size, rng):
    """One pixel per texel region, landing exactly on texel centers."""
    assert size * size >= resolution * resolution
    flat = np.arange(resolution * resolution)
    ty, tx = np.divmod(flat, resolution)
    us = (tx + 0.5) / resolution
    vs = (ty + 0.5) / resolution
    ss = rng.uniform(0, 1, flat.size)
    cols = rng.uniform(-1, 1, (flat.size, 3))
    return synthetic_buffers(us, vs, ss, size=size), cols


class TestUnproject:
    def test_constant_views_are_fixed_point(self):
        rng = np.random.default_rng(8)
        buf, _ = texel_centered_view(8, 8, rng)
        images = np.full((1, 3, 8, 8), 0.25, dtype=np.float32)
        accs = [uvfusion.splat(images, [buf], r) for r in (4, 8, 16)]
        out = uvfusion.unproject(accs, ScaleWeights(0.2, 0.3, 0.5), [buf],
                                 images)
        np.testing.assert_allclose(out, 0.25, atol=1e-6)

    def test_single_view_identity_at_texel_centers(self):
        rng = np.random.default_rng(9)
        res = 8
        buf, cols = texel_centered_view(res, res, rng)
        images = images_from_colors(cols, res)
        acc = uvfusion.splat(images, [buf], res)
        out = uvfusion.unproject([acc, acc, acc], ScaleWeights(0.0, 0.0, 1.0),
                                 [buf], images)
        np.testing.assert_allclose(out, images, atol=1e-6)

    def test_two_views_share_fused_color(self):
        rng = np.random.default_rng(10)
        res = 8
        buf_a, cols_a = texel_centered_view(res, res, rng)
        buf_b, cols_b = texel_centered_view(res, res, rng)
        images = np.stack([images_from_colors(cols_a, res)[0],
                           images_from_colors(cols_b, res)[0]])
        accs = [uvfusion.splat(images, [buf_a, buf_b], r) for r in (4, 8, 16)]
        out = uvfusion.unproject(accs, ScaleWeights(0.0, 1.0, 0.0),
                                 [buf_a, buf_b], images)
        # same texel centers in both views -> identical unprojected values
        np.testing.assert_allclose(out[0], out[1], atol=1e-6)

    def test_background_passes_fallback_through(self):
        rng = np.random.default_rng(11)
        us = np.array([0.5])
        vs = np.array([0.5])
        buf = synthetic_buffers(us, vs, np.array([0.5]), size=4)
        images = rng.uniform(-1, 1, (1, 3, 4, 4)).astype(np.float32)
        accs = [uvfusion.splat(images, [buf], r) for r in (2, 4, 8)]
        out = uvfusion.unproject(accs, ScaleWeights(0.0, 0.4, 0.6), [buf],
                                 images)
        bg = ~buf.mask
        np.testing.assert_array_equal(
            np.moveaxis(out[0], 0, -1)[bg], np.moveaxis(images[0], 0, -1)[bg])


class TestFusedTexture:
    def test_full_coverage_blend_formula(self):
        rng = np.random.default_rng(12)
        res = 8
        buf, cols = texel_centered_view(res, res, rng)
        images = images_from_colors(cols, res)
        acc_c = uvfusion.splat(images, [buf], 2)
        acc_m = uvfusion.splat(images, [buf], 4)
        acc_f = uvfusion.splat(images, [buf], 8)
        w = ScaleWeights(0.0, 0.4, 0.6)
        tex, holes = uvfusion.fused_texture([acc_c, acc_m, acc_f], w)
        assert not holes.any()

        centers = (np.arange(8) + 0.5) * (4 / 8) - 0.5
        xs, ys = np.meshgrid(centers, centers)
        from uvfuse import _kernels
        up_m, _ = _kernels.bilinear_gather(
            acc_m.fused_values(), np.ones((4, 4), bool),
            xs.ravel(), ys.ravel())
        want = 0.4 * up_m.reshape(8, 8, 3) + 0.6 * acc_f.fused_values()
        np.testing.assert_allclose(tex, want, atol=1e-9)

    def test_texel_covered_only_at_coarse(self):
        # single pixel -> covered at every resolution, but check a fine
        # texel whose only coverage is the coarse accumulator
        us = np.array([0.7])
        vs = np.array([0.2])
        cols = np.array([[0.5, -0.5, 0.25]])
        buf = synthetic_buffers(us, vs, np.array([0.0]), size=1)
        images = images_from_colors(cols, 1)
        acc_c = uvfusion.splat(images, [buf], 2)
        acc_m = uvfusion.splat(images, [buf], 4)
        acc_f = uvfusion.splat(images, [buf], 8)
        tex, holes = uvfusion.fused_texture(
            [acc_c, acc_m, acc_f], ScaleWeights(0.0, 0.4, 0.6))
        # fine texel (1, 6) is covered; (0, 4) is covered only at coarse
        assert not holes[1, 5]
        assert not holes[0, 4]
        np.testing.assert_allclose(tex[1, 5], cols[0], atol=1e-9)
        np.testing.assert_allclose(tex[0, 4], cols[0], atol=1e-9)

    def test_holes_marked(self):
        us = np.array([0.1])
        vs = np.array([0.1])
        buf = synthetic_buffers(us, vs, np.array([0.5]), size=1)
        images = images_from_colors(np.array([[1.0, 0, 0]]), 1)
        accs = [uvfusion.splat(images, [buf], r) for r in (2, 4, 8)]
        _, holes = uvfusion.fused_texture(accs, ScaleWeights(0, 0.4, 0.6))
        assert holes[7, 7]
        assert not holes[0, 0]


class TestConservation:
    def test_equal_scores_full_visibility_gives_unweighted_mean(self):
        rng = np.random.default_rng(13)
        res = 4
        n_views = 3
        buffers, imgs = [], []
        for _ in range(n_views):
            buf, cols = texel_centered_view(res, res, rng)
            buf.score[buf.mask] = 0.5
            buffers.append(buf)
            imgs.append(images_from_colors(cols, res)[0])
        imgs = np.stack(imgs)
        acc = uvfusion.splat(imgs, buffers, res)
        mean = imgs.mean(axis=0)
        flat = np.moveaxis(mean, 0, -1).reshape(res * res, 3)
        fused = acc.fused_values().reshape(res * res, 3)
        np.testing.assert_allclose(fused, flat, atol=1e-6)
