import numpy as np
import pytest

from staintk.color import rgb_to_od
from staintk.constants import HEMATOXYLIN, EOSIN
from staintk.model import StainMatrix, StainDensity
from staintk.stainsep import SeparationConfig, StainSeparation, fit_profile, normalize_spcn, make_synthetic_patch
from staintk.stainsep import nonnegative_projection
from staintk.util import make_rng

from . import _stain
from ._config import PerturbConfig
from ._stain import perturb_stain_matrix, stain_augment

REFERENCE = StainMatrix.from_columns([HEMATOXYLIN, EOSIN])


@pytest.fixture(scope='module')
def patch():
    return make_synthetic_patch(StainMatrix.from_columns([[.62, .72, .30], [.08, .98, .14]]),
                                24, 24, np.random.default_rng(101))


class TestPerturbStainMatrix:

    def test_zero_sigma_keeps_the_matrix(self):
        perturbed = perturb_stain_matrix(REFERENCE, PerturbConfig(scale_sigma=0.), make_rng(1))

        assert perturbed == REFERENCE

    def test_is_deterministic(self):
        cfg = PerturbConfig(scale_sigma=.05)

        assert perturb_stain_matrix(REFERENCE, cfg, make_rng(9)) == perturb_stain_matrix(REFERENCE, cfg, make_rng(9))

    def test_distinct_seeds_give_distinct_matrices(self):
        cfg = PerturbConfig(scale_sigma=.05)

        outputs = {perturb_stain_matrix(REFERENCE, cfg, make_rng(seed)) for seed in range(100)}

        assert len(outputs) >= 99

    def test_output_is_a_valid_stain_matrix(self):
        perturbed = perturb_stain_matrix(REFERENCE, PerturbConfig(scale_sigma=.5), make_rng(3))

        assert np.all(perturbed.values >= 0.)
        assert np.allclose(np.linalg.norm(perturbed.values, axis=0), 1., atol=1e-9)

    def test_log_ratio_spread(self):
        cfg = PerturbConfig(scale_sigma=.05)
        rng = make_rng(2024)
        log_ratios = np.array([
            np.log(perturb_stain_matrix(REFERENCE, cfg, rng).values / REFERENCE.values)
            for _ in range(10_000)
        ])

        # Differences within a column cancel the renormalization.
        for j in range(REFERENCE.r):
            for i, k in ((0, 1), (0, 2), (1, 2)):
                diff = log_ratios[:, i, j] - log_ratios[:, k, j]
                assert .045 <= np.std(diff, ddof=1) / np.sqrt(2.) <= .055


class TestStainAugment:

    def test_zero_sigma_matches_self_normalization(self, patch):
        cfg = SeparationConfig(n_stains=2)

        result = stain_augment(patch.image, cfg, PerturbConfig(scale_sigma=0.), make_rng(1))

        expected = normalize_spcn(patch.image, fit_profile(patch.image, cfg), cfg)
        diff = np.abs(result.image.data.astype(int) - expected.data.astype(int))
        assert diff.max() <= 1

    def test_zero_sigma_keeps_the_image(self, patch):
        result = stain_augment(patch.image, SeparationConfig(n_stains=2), PerturbConfig(scale_sigma=0.), make_rng(4))

        diff = np.abs(result.image.data.astype(int) - patch.image.data.astype(int))
        assert diff.max() <= 1
        assert result.stains is not None

    def test_density_is_preserved(self, patch):
        result = stain_augment(patch.image, SeparationConfig(n_stains=2), PerturbConfig(scale_sigma=.05), make_rng(7))

        recovered = nonnegative_projection(result.stains.values, rgb_to_od(result.image).values)
        expected = result.density.values
        assert np.linalg.norm(recovered - expected) / np.linalg.norm(expected) <= .02

    def test_is_deterministic(self, patch):
        cfg = SeparationConfig(n_stains=2)
        pcfg = PerturbConfig(scale_sigma=.05)

        a = stain_augment(patch.image, cfg, pcfg, make_rng(11))
        b = stain_augment(patch.image, cfg, pcfg, make_rng(11))

        assert a.image == b.image
        assert a.stains == b.stains

    def test_degenerate_separation_falls_back(self, patch, monkeypatch):
        seeds = []

        def degenerate_separation(od, cfg):
            seeds.append(cfg.seed)
            stains = StainMatrix.from_columns([HEMATOXYLIN, HEMATOXYLIN])
            density = np.zeros((2, od.n))
            return StainSeparation(stains, StainDensity(density, od.height, od.width),
                                   n_iter=1, converged=True, objective=[0., 0.], degenerate=True, n_tissue=od.n)

        monkeypatch.setattr(_stain, 'estimate_stains', degenerate_separation)

        result = stain_augment(patch.image, SeparationConfig(n_stains=2, seed=5), PerturbConfig(max_attempts=4),
                               make_rng(0))

        assert result.fell_back
        assert result.attempts == 4
        assert result.image == patch.image
        assert seeds[0] == 5
        assert len(set(seeds)) == 4
