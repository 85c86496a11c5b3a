import numpy as np
import pytest

from glpb import pyramid as pyr
from glpb.errors import TargetDimMismatch, TooManyLevels
from glpb.pyramid import BINOMIAL_KERNEL, Image, Kernel

from conftest import rand_image
from oracles import expand_oracle, reduce_oracle


class TestKernel:
    def test_default_taps_sum_to_one(self):
        assert abs(float(BINOMIAL_KERNEL.taps.sum()) - 1.0) < 1e-7

    def test_default_taps_symmetric(self):
        t = BINOMIAL_KERNEL.taps
        assert t[0] == t[4] and t[1] == t[3]

    def test_default_taps_split_phases_equally(self):
        t = BINOMIAL_KERNEL.taps
        assert abs(float(t[0] + t[2] + t[4]) - 0.5) < 1e-7
        assert abs(float(t[1] + t[3]) - 0.5) < 1e-7

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            Kernel(np.array([1, 4, 6, 4, 1], dtype=np.float32))

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            Kernel(np.array([0.0, 0.25, 0.5, 0.15, 0.1], dtype=np.float32))

    def test_rejects_unequal_phase_weight(self):
        # sums to 1 and symmetric, but even phase carries 0.6
        with pytest.raises(ValueError):
            Kernel(np.array([0.1, 0.2, 0.4, 0.2, 0.1], dtype=np.float32))

    def test_rejects_wrong_length(self):
        with pytest.raises(ValueError):
            Kernel(np.array([0.25, 0.5, 0.25], dtype=np.float32))


class TestImage:
    def test_layout_is_planar(self):
        img = Image(np.zeros((3, 4, 7), dtype=np.float32))
        assert (img.channels, img.height, img.width) == (3, 4, 7)

    def test_rejects_bad_channel_count(self):
        with pytest.raises(ValueError):
            Image(np.zeros((2, 4, 4), dtype=np.float32))

    def test_rejects_non_finite(self):
        arr = np.zeros((1, 2, 2), dtype=np.float32)
        arr[0, 0, 0] = np.nan
        with pytest.raises(ValueError):
            Image(arr)


class TestReduce:
    def test_constant_4x4_halves_to_constant(self):
        out = pyr.reduce(Image.constant(4, 4, 0.5))
        assert (out.width, out.height) == (2, 2)
        assert np.abs(out.planes - 0.5).max() < 1e-6

    def test_odd_dims_ceil_halved(self):
        out = pyr.reduce(Image.constant(5, 3, 0.2))
        assert (out.width, out.height) == (3, 2)

    def test_one_pixel_input_copies(self):
        out = pyr.reduce(Image.constant(1, 1, 0.37))
        assert (out.width, out.height) == (1, 1)
        assert abs(float(out.planes[0, 0, 0]) - 0.37) < 1e-6

    def test_impulse_matches_direct_convolution(self):
        plane = np.zeros((8, 8), dtype=np.float32)
        plane[4, 4] = 1.0
        got = pyr.reduce(Image(plane[None])).planes[0]
        want = reduce_oracle(plane.astype(np.float64), BINOMIAL_KERNEL.taps)
        assert np.abs(got - want).max() <= 1e-6

    @pytest.mark.parametrize("w,h", [(1, 1), (2, 2), (3, 5), (8, 8), (13, 9), (16, 16)])
    def test_random_images_match_direct_convolution(self, w, h):
        rng = np.random.default_rng(100 + w * h)
        img = rand_image(rng, w, h)
        got = pyr.reduce(img).planes[0]
        want = reduce_oracle(img.planes[0].astype(np.float64), BINOMIAL_KERNEL.taps)
        assert np.abs(got - want).max() <= 1e-6

    def test_linear_in_input(self):
        rng = np.random.default_rng(3)
        x, y = rand_image(rng, 11, 7), rand_image(rng, 11, 7)
        combined = pyr.reduce(Image(0.6 * x.planes - 0.3 * y.planes)).planes
        separate = 0.6 * pyr.reduce(x).planes - 0.3 * pyr.reduce(y).planes
        assert np.abs(combined - separate).max() <= 1e-6

    def test_channels_processed_independently(self):
        rng = np.random.default_rng(4)
        img = rand_image(rng, 10, 6, channels=3)
        whole = pyr.reduce(img).planes
        for c in range(3):
            alone = pyr.reduce(Image(img.planes[c][None])).planes[0]
            assert np.array_equal(whole[c], alone)


class TestExpand:
    def test_constant_2x2_to_4x4(self):
        out = pyr.expand(Image.constant(2, 2, 0.3), BINOMIAL_KERNEL, 4, 4)
        assert (out.width, out.height) == (4, 4)
        assert np.abs(out.planes - 0.3).max() < 1e-6

    def test_odd_targets(self):
        out = pyr.expand(Image.constant(3, 2, 0.7), BINOMIAL_KERNEL, 5, 3)
        assert (out.width, out.height) == (5, 3)
        assert np.abs(out.planes - 0.7).max() < 1e-6

    def test_impulse_matches_direct_convolution(self):
        plane = np.zeros((4, 4), dtype=np.float32)
        plane[2, 2] = 1.0
        got = pyr.expand(Image(plane[None]), BINOMIAL_KERNEL, 8, 8).planes[0]
        want = expand_oracle(plane.astype(np.float64), BINOMIAL_KERNEL.taps, 8, 8)
        assert np.abs(got - want).max() <= 1e-6

    @pytest.mark.parametrize("w,h", [(1, 1), (2, 3), (5, 4), (8, 8), (9, 13)])
    @pytest.mark.parametrize("dw,dh", [(0, 0), (-1, 0), (0, -1), (-1, -1)])
    def test_random_images_match_direct_convolution(self, w, h, dw, dh):
        tw, th = 2 * w + dw, 2 * h + dh
        if tw < 1 or th < 1:
            pytest.skip("degenerate target")
        rng = np.random.default_rng(w * 31 + h * 7 + dw * 3 + dh)
        img = rand_image(rng, w, h)
        got = pyr.expand(img, BINOMIAL_KERNEL, tw, th).planes[0]
        want = expand_oracle(img.planes[0].astype(np.float64), BINOMIAL_KERNEL.taps, th, tw)
        assert np.abs(got - want).max() <= 1e-6

    @pytest.mark.parametrize("tw,th", [(5, 4), (8, 4), (6, 3), (6, 6), (3, 2)])
    def test_rejects_illegal_targets(self, tw, th):
        img = Image.constant(3, 2, 0.1)  # legal: w in {5, 6}, h in {3, 4}
        legal_w, legal_h = (5, 6), (3, 4)
        if tw in legal_w and th in legal_h:
            pytest.skip("legal combination")
        with pytest.raises(TargetDimMismatch):
            pyr.expand(img, BINOMIAL_KERNEL, tw, th)

    def test_linear_in_input(self):
        rng = np.random.default_rng(5)
        x, y = rand_image(rng, 6, 9), rand_image(rng, 6, 9)
        combined = pyr.expand(Image(0.25 * x.planes + 0.75 * y.planes), BINOMIAL_KERNEL, 11, 18).planes
        separate = (
            0.25 * pyr.expand(x, BINOMIAL_KERNEL, 11, 18).planes
            + 0.75 * pyr.expand(y, BINOMIAL_KERNEL, 11, 18).planes
        )
        assert np.abs(combined - separate).max() <= 1e-6


class TestGaussianPyramid:
    def test_level_dims_for_350x230(self):
        gp = pyr.build_gaussian(Image.constant(350, 230, 0.4), BINOMIAL_KERNEL, 4)
        assert gp.level_dims == [(350, 230), (175, 115), (88, 58), (44, 29), (22, 15)]

    def test_constant_stays_constant_at_every_level(self):
        gp = pyr.build_gaussian(Image.constant(40, 24, 0.633, 3), BINOMIAL_KERNEL, 4)
        for level in gp.levels:
            assert np.abs(level.planes - 0.633).max() < 1e-6

    def test_single_pixel_zero_levels(self):
        gp = pyr.build_gaussian(Image.constant(1, 1, 0.9), BINOMIAL_KERNEL, 0)
        assert gp.level_dims == [(1, 1)]
        assert float(gp.levels[0].planes[0, 0, 0]) == np.float32(0.9)

    def test_base_level_is_input(self):
        rng = np.random.default_rng(6)
        img = rand_image(rng, 12, 10)
        gp = pyr.build_gaussian(img, BINOMIAL_KERNEL, 2)
        assert np.array_equal(gp.levels[0].planes, img.planes)

    def test_too_many_levels(self):
        with pytest.raises(TooManyLevels):
            pyr.build_gaussian(Image.constant(64, 64, 0.0), BINOMIAL_KERNEL, 99)
        with pytest.raises(TooManyLevels):
            pyr.build_gaussian(Image.constant(64, 16, 0.0), BINOMIAL_KERNEL, 5)
        # the limit itself is fine
        pyr.build_gaussian(Image.constant(64, 16, 0.0), BINOMIAL_KERNEL, 4)

    def test_negative_levels(self):
        with pytest.raises(ValueError):
            pyr.build_gaussian(Image.constant(8, 8, 0.0), BINOMIAL_KERNEL, -1)


class TestLaplacianPyramid:
    def test_constant_bands_are_zero(self):
        lp = pyr.build_laplacian(Image.constant(32, 24, 0.7), BINOMIAL_KERNEL, 3)
        assert len(lp.band_levels) == 3
        for band in lp.band_levels:
            assert np.abs(band.planes).max() < 1e-6
        assert np.abs(lp.top.planes - 0.7).max() < 1e-6

    def test_zero_levels_is_input_only(self):
        rng = np.random.default_rng(7)
        img = rand_image(rng, 9, 5)
        lp = pyr.build_laplacian(img, BINOMIAL_KERNEL, 0)
        assert lp.band_levels == []
        assert np.array_equal(lp.top.planes, img.planes)

    def test_bands_complement_expanded_next_level(self):
        rng = np.random.default_rng(8)
        img = rand_image(rng, 32, 32)
        gp = pyr.build_gaussian(img, BINOMIAL_KERNEL, 3)
        lp = pyr.build_laplacian(img, BINOMIAL_KERNEL, 3)
        for l in range(3):
            fine = gp.levels[l]
            up = pyr.expand(gp.levels[l + 1], BINOMIAL_KERNEL, fine.width, fine.height)
            recon = lp.band_levels[l].planes + up.planes
            assert np.abs(recon - fine.planes).max() <= 1e-6

    def test_band_dims_match_gaussian_levels(self):
        lp = pyr.build_laplacian(Image.constant(21, 13, 0.2), BINOMIAL_KERNEL, 2)
        assert lp.level_dims == [(21, 13), (11, 7), (6, 4)]


class TestCollapse:
    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_round_trip_identity(self, n):
        rng = np.random.default_rng(40 + n)
        img = rand_image(rng, 37, 29, channels=3)
        recon = pyr.collapse(pyr.build_laplacian(img, BINOMIAL_KERNEL, n))
        assert np.abs(recon.planes - img.planes).max() <= 1e-4

    def test_zero_bands_constant_top(self):
        top = Image.constant(6, 4, 0.55)
        bands = [Image.constant(22, 15, 0.0), Image.constant(11, 8, 0.0)]
        lp = pyr.LaplacianPyramid(bands, top)
        out = pyr.collapse(lp)
        assert (out.width, out.height) == (22, 15)
        assert np.abs(out.planes - 0.55).max() < 1e-6

    def test_zero_level_pyramid_returns_top(self):
        rng = np.random.default_rng(9)
        img = rand_image(rng, 5, 8)
        out = pyr.collapse(pyr.LaplacianPyramid([], img))
        assert np.array_equal(out.planes, img.planes)

    def test_linear_in_bands_and_top(self):
        rng = np.random.default_rng(10)
        x, y = rand_image(rng, 24, 18), rand_image(rng, 24, 18)
        lx = pyr.build_laplacian(x, BINOMIAL_KERNEL, 3)
        ly = pyr.build_laplacian(y, BINOMIAL_KERNEL, 3)
        mixed = pyr.LaplacianPyramid(
            [Image(0.5 * bx.planes + 0.5 * by.planes) for bx, by in zip(lx.band_levels, ly.band_levels)],
            Image(0.5 * lx.top.planes + 0.5 * ly.top.planes),
        )
        combined = pyr.collapse(mixed).planes
        separate = 0.5 * pyr.collapse(lx).planes + 0.5 * pyr.collapse(ly).planes
        assert np.abs(combined - separate).max() <= 1e-6


class TestLevelHelpers:
    def test_max_levels_is_floor_log2_of_min_dim(self):
        assert pyr.max_levels(350, 230) == 7
        assert pyr.max_levels(1, 1) == 0
        assert pyr.max_levels(512, 512) == 9
        assert pyr.max_levels(17, 13) == 3

    def test_default_levels_keeps_top_at_least_4px(self):
        assert pyr.default_levels(700, 460) == 6
        assert pyr.default_levels(64, 64) == 4
        assert pyr.default_levels(4, 4) == 0
        assert pyr.default_levels(1, 1) == 0
