import numpy as np
import pytest
from scipy.stats import chisquare

from staintk.errors import InvalidInputError
from staintk.model import RgbImage, SegMask, StainMatrix
from staintk.stainsep import SeparationConfig, make_synthetic_patch
from staintk.util import make_rng

from ._config import AugmentationBranch, MixturePolicy
from ._geometric import flip, geometric_augment
from ._mixture import mixture_augment
from ._prior import fit_stat_prior


@pytest.fixture(scope='module')
def image() -> RgbImage:
    stains = StainMatrix.from_columns([[.62, .72, .30], [.08, .98, .14]])
    return make_synthetic_patch(stains, 16, 16, np.random.default_rng(5)).image


@pytest.fixture(scope='module')
def mask() -> SegMask:
    return SegMask(np.random.default_rng(6).random((16, 16)) < .3)


class TestMixturePolicy:

    def test_draw_frequencies(self):
        policy = MixturePolicy(.25, .25)
        rng = make_rng(42)
        branches = [policy.draw(rng) for _ in range(10_000)]

        counts = np.array([
            branches.count(AugmentationBranch.RANDSTAINNA),
            branches.count(AugmentationBranch.STAIN_SEP),
            branches.count(AugmentationBranch.IDENTITY),
        ])
        freqs = counts / len(branches)

        assert np.all(np.abs(freqs - [.25, .25, .5]) <= .02)
        assert chisquare(counts, f_exp=[2500., 2500., 5000.]).pvalue > .001

    @pytest.mark.parametrize('p_randstainna, p_stain_sep', [(-.1, 0.), (1.1, 0.), (.6, .5)])
    def test_invalid(self, p_randstainna, p_stain_sep):
        with pytest.raises(InvalidInputError):
            MixturePolicy(p_randstainna, p_stain_sep)


class TestMixtureAugment:

    def test_zero_policy_is_identity(self, image, mask):
        rng = make_rng(0)

        for _ in range(20):
            sample = mixture_augment(image, mask, MixturePolicy(0., 0.), rng)

            assert sample.applied == AugmentationBranch.IDENTITY
            assert sample.image == image
            assert sample.mask is mask

    def test_randstainna_policy(self, image, mask):
        prior = fit_stat_prior([image])
        rng = make_rng(1)

        for _ in range(5):
            sample = mixture_augment(image, mask, MixturePolicy(1., 0.), rng, prior=prior)

            assert sample.applied == AugmentationBranch.RANDSTAINNA
            assert sample.mask == mask

    def test_stain_sep_keeps_the_mask(self, image, mask):
        sample = mixture_augment(image, mask, MixturePolicy(0., 1.), make_rng(2), cfg=SeparationConfig(n_stains=2))

        assert sample.applied == AugmentationBranch.STAIN_SEP
        assert sample.mask == mask
        assert sample.image != image

    def test_stain_sep_falls_back_on_blank_image(self, mask):
        blank = RgbImage(np.full((16, 16, 3), 255, dtype=np.uint8))

        sample = mixture_augment(blank, mask, MixturePolicy(0., 1.), make_rng(3))

        assert sample.applied == AugmentationBranch.IDENTITY
        assert sample.image == blank

    def test_randstainna_needs_prior(self, image):
        with pytest.raises(InvalidInputError):
            mixture_augment(image, None, MixturePolicy(1., 0.), make_rng(4))

    def test_is_deterministic(self, image, mask):
        prior = fit_stat_prior([image])
        policy = MixturePolicy(.5, .5)

        a = [mixture_augment(image, mask, policy, make_rng(7, i), prior=prior) for i in range(4)]
        b = [mixture_augment(image, mask, policy, make_rng(7, i), prior=prior) for i in range(4)]

        assert a == b


class TestGeometricAugment:

    @pytest.mark.parametrize('horizontal, vertical', [(False, False), (True, False), (False, True), (True, True)])
    def test_flip_is_an_involution(self, image, mask, horizontal, vertical):
        once = flip(image, mask, horizontal, vertical)
        twice = flip(*once, horizontal, vertical)

        assert twice == (image, mask)

    def test_constant_image(self):
        img = RgbImage(np.full((3, 4, 3), 77, dtype=np.uint8))
        mask = SegMask(np.array([[1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]))

        out, flipped = flip(img, mask, True, True)

        assert out == img
        assert flipped.values[2, 3]
        assert flipped.count() == 1

    @pytest.mark.parametrize('seed', range(8))
    def test_matches_index_remap(self, image, mask, seed):
        replay = make_rng(seed)
        horizontal = replay.random() < .5
        vertical = replay.random() < .5

        out, out_mask = geometric_augment(image, mask, make_rng(seed))

        h, w = mask.shape
        for y in range(h):
            for x in range(w):
                sy = h - 1 - y if vertical else y
                sx = w - 1 - x if horizontal else x
                assert np.array_equal(out.data[y, x], image.data[sy, sx])
                assert out_mask.values[y, x] == mask.values[sy, sx]

    def test_without_mask(self, image):
        out, out_mask = geometric_augment(image, None, make_rng(0))

        assert out_mask is None
        assert (out.height, out.width) == (image.height, image.width)

    def test_dimension_mismatch(self, image):
        with pytest.raises(InvalidInputError):
            geometric_augment(image, SegMask.empty(4, 4), make_rng(0))
