import numpy as np
import pytest

from staintk.color import rgb_to_od
from staintk.constants import HEMATOXYLIN, EOSIN
from staintk.errors import InvalidInputError, InsufficientTissueError
from staintk.model import OdImage, RgbImage, StainMatrix, StainDensity

from ._config import SeparationConfig
from ._nmf import tissue_mask, estimate_stains, reconstruct, density_percentile, canonical_order, is_degenerate
from ._nmf import separation_objective, project_density, _initial_stains
from ._synthetic import make_synthetic_patch

# A well-separated stain pair, close to but not equal to the reference H&E.
TRUE_STAINS = StainMatrix.from_columns([
    [.60, .74, .32],
    [.10, .97, .18],
])


def best_cosines(found: StainMatrix, expected: StainMatrix) -> np.ndarray:
    sim = found.cosine_similarity(expected)
    return np.max(sim, axis=0)


class TestTissueMask:

    def test_white_image_has_no_tissue(self):
        od = rgb_to_od(RgbImage(np.full((4, 4, 3), 255, dtype=np.uint8)))

        assert not np.any(tissue_mask(od, .15))

    def test_zero_threshold_includes_any_absorbance(self):
        od = OdImage(np.array([[0., 1e-6, 0.], [0., 0., 0.], [0., 0., 2.]]))

        assert tissue_mask(od, 0.).tolist() == [False, True, True]

    def test_matches_per_pixel_norm(self):
        rng = np.random.default_rng(3)
        values = rng.uniform(0., .2, size=(3, 500))
        od = OdImage(values)

        mask = tissue_mask(od, .15)

        expected = [np.sqrt(np.sum(values[:, j] ** 2)) > .15 for j in range(values.shape[1])]
        assert mask.tolist() == expected


class TestEstimateStains:

    @pytest.fixture(scope='class')
    def patch(self):
        return make_synthetic_patch(TRUE_STAINS, 32, 32, np.random.default_rng(17))

    @pytest.fixture(scope='class')
    def exact_separation(self, patch):
        return estimate_stains(patch.od, SeparationConfig(n_stains=2, sparsity=0.))

    def test_recovers_stains_from_exact_product(self, exact_separation):
        assert np.all(best_cosines(exact_separation.stains, TRUE_STAINS) >= .99)

    def test_recovers_stains_from_rendered_image(self, patch):
        separation = estimate_stains(rgb_to_od(patch.image), SeparationConfig(n_stains=2))

        assert np.all(best_cosines(separation.stains, TRUE_STAINS) >= .99)

    def test_relative_reconstruction_error(self, patch, exact_separation):
        od = reconstruct(exact_separation.stains, exact_separation.density)

        error = np.linalg.norm(patch.od.values - od.values) / np.linalg.norm(patch.od.values)
        assert error <= .05

    @pytest.mark.parametrize('sparsity', [0., .1, .5])
    def test_objective_never_increases(self, patch, sparsity: float):
        separation = estimate_stains(patch.od, SeparationConfig(n_stains=2, sparsity=sparsity))

        trace = np.array(separation.objective)
        assert len(trace) == separation.n_iter + 1
        assert np.all(np.diff(trace) <= 1e-9)

    def test_output_invariants(self, exact_separation):
        w, h = exact_separation

        assert np.all(w.values >= 0.)
        assert np.allclose(np.linalg.norm(w.values, axis=0), 1., atol=1e-9)
        assert np.all(h.values >= 0.)
        assert (h.height, h.width) == (32, 32)
        assert not exact_separation.degenerate

    def test_hematoxylin_like_stain_comes_first(self, exact_separation):
        cosines = exact_separation.stains.values.T @ HEMATOXYLIN

        assert cosines[0] > cosines[1]

    def test_background_density_is_small(self, patch, exact_separation):
        background = np.all(patch.density.values == 0., axis=0)

        assert np.any(background)
        assert np.all(exact_separation.density.values[:, background] < 1e-9)

    @pytest.mark.parametrize('sparsity', [0., .1])
    def test_single_stain_direction_is_exact(self, sparsity: float):
        direction = np.array([.5, .6, .62])
        direction /= np.linalg.norm(direction)
        amounts = np.random.default_rng(2).uniform(.3, 2., size=100)
        od = OdImage(np.outer(direction, amounts))

        separation = estimate_stains(od, SeparationConfig(n_stains=1, sparsity=sparsity))

        assert separation.stains.column(0) @ direction >= 1. - 1e-9

    def test_blank_patch(self):
        od = rgb_to_od(RgbImage(np.full((8, 8, 3), 255, dtype=np.uint8)))

        with pytest.raises(InsufficientTissueError) as e:
            estimate_stains(od, SeparationConfig(n_stains=2))

        assert e.value.n_tissue == 0
        assert e.value.n_required == 20

    def test_too_few_tissue_pixels(self):
        values = np.zeros((3, 100))
        values[:, :19] = np.outer(HEMATOXYLIN, np.ones(19))

        with pytest.raises(InsufficientTissueError):
            estimate_stains(OdImage(values), SeparationConfig(n_stains=2))

    def test_is_deterministic(self, patch):
        cfg = SeparationConfig(n_stains=2, seed=123)

        a = estimate_stains(patch.od, cfg)
        b = estimate_stains(patch.od, cfg)

        assert np.array_equal(a.stains.values, b.stains.values)
        assert np.array_equal(a.density.values, b.density.values)
        assert a.objective == b.objective

    def test_iteration_budget_is_respected(self, patch):
        separation = estimate_stains(patch.od, SeparationConfig(n_stains=2, max_iters=3, tol=0.))

        assert separation.n_iter == 3
        assert not separation.converged

    def test_default_config_fits_the_stains(self, patch):
        cfg = SeparationConfig(n_stains=2)

        separation = estimate_stains(rgb_to_od(patch.image), cfg)

        assert separation.n_iter > 1
        assert separation.objective[-1] < separation.objective[0]
        start = _initial_stains(2, cfg.seed)
        assert np.max(np.abs(separation.stains.values - start)) > 1e-3

    def test_zero_tolerance_never_reports_convergence(self, patch):
        separation = estimate_stains(rgb_to_od(patch.image), SeparationConfig(n_stains=2, max_iters=5000, tol=0.))

        assert separation.n_iter > 1
        assert not separation.converged
        assert np.all(best_cosines(separation.stains, TRUE_STAINS) >= .99)

    @pytest.mark.parametrize('sparsity', [.1, .5])
    def test_tissue_density_attains_the_final_objective(self, patch, sparsity: float):
        cfg = SeparationConfig(n_stains=2, sparsity=sparsity)
        od = rgb_to_od(patch.image)

        separation = estimate_stains(od, cfg)

        mask = tissue_mask(od, cfg.tissue_od_threshold)
        objective = separation_objective(od.values[:, mask], separation.stains.values,
                                         separation.density.values[:, mask], sparsity)
        assert objective == pytest.approx(separation.objective[-1], rel=1e-9)

    def test_refit_density_is_the_projection(self, patch):
        sparse = estimate_stains(patch.od, SeparationConfig(n_stains=2, sparsity=.5))
        refit = estimate_stains(patch.od, SeparationConfig(n_stains=2, sparsity=.5, refit_density=True))

        assert np.array_equal(refit.stains.values, sparse.stains.values)
        assert sparse.density.values.sum() < refit.density.values.sum()
        expected = project_density(refit.stains, patch.od)
        assert np.allclose(refit.density.values, expected.values, rtol=0., atol=1e-9)

    def test_wrong_channel_count(self):
        with pytest.raises(InvalidInputError):
            estimate_stains(OdImage(np.ones((2, 50))), SeparationConfig(n_stains=1))


class TestCanonicalOrder:

    def test_hematoxylin_first(self):
        w = np.column_stack([EOSIN, HEMATOXYLIN])

        assert canonical_order(w) == [1, 0]

    def test_ties_are_broken_by_first_channel(self):
        # Mirror images around hematoxylin, `a` has the larger first channel.
        u = np.array([1., 0., 0.]) - HEMATOXYLIN[0] * HEMATOXYLIN
        u /= np.linalg.norm(u)
        a = np.cos(.1) * HEMATOXYLIN + np.sin(.1) * u
        b = np.cos(.1) * HEMATOXYLIN - np.sin(.1) * u

        assert canonical_order(np.column_stack([b, a])) == [1, 0]
        assert canonical_order(np.column_stack([a, b])) == [0, 1]

    def test_degenerate_columns(self):
        nearly = HEMATOXYLIN + np.array([0., .001, 0.])
        w = StainMatrix.from_columns([HEMATOXYLIN, nearly])

        assert is_degenerate(w)
        assert not is_degenerate(StainMatrix.from_columns([HEMATOXYLIN, EOSIN]))


class TestReconstruct:

    def test_zero_density(self):
        od = reconstruct(StainMatrix.from_columns([HEMATOXYLIN, EOSIN]), StainDensity(np.zeros((2, 6)), 2, 3))

        assert np.all(od.values == 0.)
        assert (od.height, od.width) == (2, 3)

    def test_single_unit_stain(self):
        od = reconstruct(StainMatrix(np.eye(3)[:, :1]), StainDensity(np.ones((1, 4))))

        assert od.values.tolist() == [[1.] * 4, [0.] * 4, [0.] * 4]

    def test_matches_naive_product(self):
        rng = np.random.default_rng(9)
        w = StainMatrix.from_columns(rng.uniform(0., 1., size=(3, 3)))
        h = StainDensity(rng.uniform(0., 2., size=(3, 20)))

        od = reconstruct(w, h)

        expected = np.zeros((3, 20))
        for i in range(3):
            for j in range(20):
                for k in range(3):
                    expected[i, j] += w.values[i, k] * h.values[k, j]
        assert np.allclose(od.values, expected, rtol=0., atol=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(InvalidInputError):
            reconstruct(StainMatrix(np.eye(3)[:, :2]), StainDensity(np.ones((3, 4))))


class TestDensityPercentile:

    def test_constant_row(self):
        assert density_percentile(StainDensity(np.full((2, 7), 1.25))).tolist() == [1.25, 1.25]

    def test_nearest_rank(self):
        values = np.random.default_rng(0).permutation(np.arange(1, 101, dtype=float))

        assert density_percentile(StainDensity(values[None, :]), 99.).tolist() == [99.]

    def test_maximum(self):
        values = np.array([[3., 1., 2.], [0., 5., 4.]])

        assert density_percentile(StainDensity(values), 100.).tolist() == [3., 5.]

    def test_single_pixel(self):
        assert density_percentile(StainDensity(np.array([[2.], [0.]])), 1.).tolist() == [2., 0.]

    @pytest.mark.parametrize('p', [0., -1., 100.5])
    def test_invalid_percentile(self, p: float):
        with pytest.raises(InvalidInputError):
            density_percentile(StainDensity(np.ones((1, 3))), p)


class TestSeparationConfig:

    def test_defaults(self):
        cfg = SeparationConfig()

        assert (cfg.n_stains, cfg.sparsity, cfg.max_iters, cfg.tol, cfg.tissue_od_threshold) == (2, .1, 200, 1e-6, .15)

    def test_with_seed(self):
        cfg = SeparationConfig(n_stains=3, sparsity=.2)

        other = cfg.with_seed(7)

        assert other.seed == 7
        assert other.n_stains == 3 and other.sparsity == .2
        assert other != cfg

    @pytest.mark.parametrize('params', [
        {'n_stains': 0},
        {'n_stains': 4},
        {'sparsity': -.1},
        {'max_iters': 0},
        {'tol': -1.},
        {'seed': -1},
    ])
    def test_invalid(self, params):
        with pytest.raises(InvalidInputError):
            SeparationConfig(**params)
