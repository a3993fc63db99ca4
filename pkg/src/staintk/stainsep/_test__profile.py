import numpy as np
import pytest

from staintk.constants import HEMATOXYLIN, EOSIN
from staintk.errors import InvalidInputError, InsufficientTissueError, ParseError
from staintk.model import RgbImage, StainMatrix

from staintk.color import rgb_to_od

from ._config import SeparationConfig
from ._normalize import normalize_spcn
from ._nmf import density_percentile, project_density
from ._profile import StainProfile, fit_profile
from ._synthetic import make_synthetic_patch

TRUE_STAINS = StainMatrix.from_columns([
    [.62, .72, .30],
    [.08, .98, .14],
])


class TestStainProfile:

    def test_json_fields(self):
        profile = StainProfile(StainMatrix.from_columns([HEMATOXYLIN, EOSIN]), [2., 1.])

        data = profile.to_dict()

        assert data['m'] == 3 and data['r'] == 2
        assert np.allclose(data['columns'][:3], HEMATOXYLIN)
        assert np.allclose(data['columns'][3:], EOSIN)
        assert data['density_scale'] == [2., 1.]

    def test_from_json(self):
        profile = StainProfile(StainMatrix.from_columns([HEMATOXYLIN, EOSIN]), [2., .75])

        assert StainProfile.from_json(profile.to_json()) == profile

    @pytest.mark.parametrize('text', [
        '{"m": 3, "r": 1, "columns": [1.0, 0.0, 0.0]}',
        '{"m": 3, "r": 2, "columns": [1.0, 0.0, 0.0], "density_scale": [1.0, 1.0]}',
        '[1, 2]',
        '{"m": 3,',
    ])
    def test_malformed_json(self, text: str):
        with pytest.raises(ParseError):
            StainProfile.from_json(text)

    @pytest.mark.parametrize('scale', [[1.], [1., 0.], [1., -2.]])
    def test_invalid_scale(self, scale):
        with pytest.raises(InvalidInputError):
            StainProfile(StainMatrix.from_columns([HEMATOXYLIN, EOSIN]), scale)

    def test_canonical_keeps_scale_with_stain(self):
        profile = StainProfile(StainMatrix.from_columns([EOSIN, HEMATOXYLIN]), [.5, 1.5])

        canonical = profile.canonical()

        assert np.array_equal(canonical.stains.column(0), profile.stains.column(1))
        assert canonical.density_scale.tolist() == [1.5, .5]


class TestFitProfile:

    def test_two_stain_patch(self):
        patch = make_synthetic_patch(TRUE_STAINS, 32, 32, np.random.default_rng(23))

        profile = fit_profile(patch.image, SeparationConfig(n_stains=2))

        sim = profile.stains.cosine_similarity(TRUE_STAINS)
        assert sim[0, 0] >= .99
        assert sim[1, 1] >= .99
        assert np.all(profile.density_scale > 0.)

    def test_single_stain_density_scale(self):
        rng = np.random.default_rng(4)
        n = 40 * 40
        amounts = np.where(rng.random(n) < .1, 2., rng.uniform(.3, 2., size=n))
        od = np.outer(HEMATOXYLIN, amounts)
        data = np.clip(np.rint(256. * np.exp(-od) - 1.), 0, 255).astype(np.uint8).T.reshape(40, 40, 3)

        profile = fit_profile(RgbImage(data), SeparationConfig(n_stains=1))

        assert profile.density_scale[0] == pytest.approx(2., rel=.01)

    def test_scale_comes_from_the_projected_density(self):
        patch = make_synthetic_patch(TRUE_STAINS, 24, 24, np.random.default_rng(3))
        cfg = SeparationConfig(n_stains=2)

        profile = fit_profile(patch.image, cfg)

        density = project_density(profile.stains, rgb_to_od(patch.image, cfg.i0))
        assert profile.density_scale.tolist() == density_percentile(density).tolist()

    def test_blank_patch(self):
        with pytest.raises(InsufficientTissueError):
            fit_profile(RgbImage(np.full((16, 16, 3), 255, dtype=np.uint8)))


class TestNormalizeSpcn:

    @pytest.mark.parametrize('seed', range(20))
    def test_self_normalization_is_near_identity(self, seed: int):
        patch = make_synthetic_patch(TRUE_STAINS, 24, 24, np.random.default_rng(seed))
        cfg = SeparationConfig(n_stains=2)

        out = normalize_spcn(patch.image, fit_profile(patch.image, cfg), cfg)

        diff = np.abs(out.data.astype(int) - patch.image.data.astype(int))
        assert diff.mean() <= 1.
        assert diff.max() <= 3

    @pytest.mark.parametrize('seed', [0, 7, 19])
    def test_self_normalization_keeps_pure_stain_pixels(self, seed: int):
        patch = make_synthetic_patch(TRUE_STAINS, 24, 24, np.random.default_rng(seed))
        cfg = SeparationConfig(n_stains=2, sparsity=.1)

        out = normalize_spcn(patch.image, fit_profile(patch.image, cfg), cfg)

        # The L1 penalty can leave pure-stain pixels outside the cone of the fitted stains.
        pure = np.any(patch.density.values == 0., axis=0) & np.any(patch.density.values > 0., axis=0)
        diff = np.abs(out.data.reshape(-1, 3).astype(int) - patch.image.data.reshape(-1, 3).astype(int))
        assert np.any(pure)
        assert diff[pure].max() <= 1

    def test_background_stays_white(self):
        patch = make_synthetic_patch(TRUE_STAINS, 32, 32, np.random.default_rng(8), background_fraction=.4)
        data = np.array(patch.image.data)
        rng = np.random.default_rng(9)
        near_white = np.all(data == 255, axis=2)
        data[near_white] = rng.integers(250, 256, size=(np.count_nonzero(near_white), 3))
        src = RgbImage(data)
        target = StainProfile(StainMatrix.from_columns([HEMATOXYLIN, EOSIN]), [1.2, .9])

        out = normalize_spcn(src, target, SeparationConfig(n_stains=2))

        bright = np.min(data, axis=2) >= 250
        assert np.any(bright)
        assert np.all(np.min(out.data[bright], axis=1) >= 240)

    def test_swapped_target_gives_identical_output(self):
        patch = make_synthetic_patch(TRUE_STAINS, 24, 24, np.random.default_rng(31))
        target = StainProfile(StainMatrix.from_columns([HEMATOXYLIN, EOSIN]), [1.4, .8])
        swapped = StainProfile(StainMatrix.from_columns([EOSIN, HEMATOXYLIN]), [.8, 1.4])

        a = normalize_spcn(patch.image, target)
        b = normalize_spcn(patch.image, swapped)

        assert a == b

    def test_structure_is_preserved(self):
        patch = make_synthetic_patch(TRUE_STAINS, 24, 24, np.random.default_rng(12))
        target = StainProfile(StainMatrix.from_columns([HEMATOXYLIN, EOSIN]), [1.4, .8])

        out = normalize_spcn(patch.image, target)

        # White pixels have zero density.
        src_white = np.all(patch.image.data == 255, axis=2)
        out_white = np.all(out.data >= 250, axis=2)
        assert np.all(out_white[src_white])

    def test_stain_count_mismatch(self):
        patch = make_synthetic_patch(TRUE_STAINS, 16, 16, np.random.default_rng(1))
        target = StainProfile(StainMatrix.from_columns([HEMATOXYLIN]), [1.])

        with pytest.raises(InvalidInputError):
            normalize_spcn(patch.image, target, SeparationConfig(n_stains=2))
