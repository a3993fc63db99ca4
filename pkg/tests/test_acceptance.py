import numpy as np
import pytest

import staintk
from staintk.metrics import dice, iou
from staintk.model import SegMask
from staintk.mtl import LossWeights, PixelBatch, ToyModelParams, finite_diff_check
from staintk.stainsep import SeparationConfig, estimate_stains, make_synthetic_patch


@pytest.mark.slow
class TestStainRecovery:

    @pytest.mark.parametrize('seed', range(50))
    def test_recovers_known_stains(self, seed: int, true_stains):
        patch = make_synthetic_patch(true_stains, 32, 32, np.random.default_rng(seed))

        separation = estimate_stains(patch.od, SeparationConfig(n_stains=2, sparsity=0.))

        cosines = separation.stains.cosine_similarity(true_stains)
        assert np.all(np.max(cosines, axis=0) >= .99)
        assert np.all(np.diff(separation.objective) <= 1e-9)


@pytest.mark.slow
def test_metrics_match_set_counting():
    rng = np.random.default_rng(1000)
    for _ in range(1_000):
        a = rng.random((16, 16)) < rng.random()
        b = rng.random((16, 16)) < rng.random()
        pa = {tuple(idx) for idx in np.argwhere(a)}
        pb = {tuple(idx) for idx in np.argwhere(b)}
        union = pa | pb

        d = dice(SegMask(a), SegMask(b))
        i = iou(SegMask(a), SegMask(b))

        if not union:
            assert d == i == 1.
            continue
        assert d == pytest.approx(2 * len(pa & pb) / (len(pa) + len(pb)), abs=1e-12)
        assert i == pytest.approx(len(pa & pb) / len(union), abs=1e-12)
        assert d == pytest.approx(2 * i / (1 + i), abs=1e-12)


@pytest.mark.slow
@pytest.mark.parametrize('alpha', [0., .3, 1.])
@pytest.mark.parametrize('seed', range(20))
def test_gradient_matches_finite_differences(seed: int, alpha: float):
    rng = staintk.util.make_rng(seed)
    params = ToyModelParams.random(4, 2, rng, scale=.5)
    batch = PixelBatch(rng.normal(size=(30, 4)), rng.uniform(0., 2., size=(30, 3)), rng.integers(0, 2, size=30))

    assert finite_diff_check(params, batch, LossWeights(alpha)) < 1e-5
