import math

import numpy as np
import pytest

from staintk.errors import InvalidInputError

from ._loss import LossWeights, compute_losses, gradients, finite_diff_check, total_loss
from ._loss import reconstruction_loss, segmentation_loss
from ._model import ToyModelParams, PixelBatch, PARAM_NAMES, forward


def random_problem(seed: int, n: int = 30, d: int = 4, r: int = 2, m: int = 3, scale: float = .5):
    rng = np.random.default_rng(seed)
    params = ToyModelParams.random(d, r, rng, m=m, scale=scale)
    batch = PixelBatch(rng.normal(size=(n, d)), rng.uniform(0., 2., size=(n, m)), rng.integers(0, 2, size=n))
    return params, batch


class TestLosses:

    def test_zero_logits_cost_ln2(self):
        params, batch = random_problem(1)
        zero = ToyModelParams.zeros(params.d, params.r)

        losses = compute_losses(zero, batch, LossWeights(0.))

        assert losses.seg == pytest.approx(math.log(2.), abs=1e-12)
        assert losses.total == losses.seg

    def test_reconstruction_loss_is_mse(self):
        params, batch = random_problem(2)
        res = forward(params, batch)

        expected = np.sum((res.recon - batch.od_target) ** 2) / (batch.n * batch.m)

        assert reconstruction_loss(res, batch) == pytest.approx(expected, rel=1e-12)

    def test_segmentation_loss_is_finite_for_large_logits(self):
        batch = PixelBatch(np.zeros((2, 1)), np.zeros((2, 3)), [1, 0])
        params = ToyModelParams(a_h=[[0.]], b_h=[0.], a_w=[[0., 0., 0.]], b_w=[0., 0., 0.],
                                a_c=[0., 0., 0., 0.], b_c=1000.)

        loss = segmentation_loss(forward(params, batch), batch)

        assert loss == pytest.approx(500.)

    @pytest.mark.parametrize('alpha', [0., .3, 1., 2.])
    def test_total_is_linear_in_alpha(self, alpha: float):
        params, batch = random_problem(3)

        losses = compute_losses(params, batch, LossWeights(alpha))

        assert losses.total == pytest.approx(alpha * losses.recon + losses.seg, rel=1e-12)
        assert total_loss(LossWeights(alpha), losses.recon, losses.seg) == losses.total

    def test_negative_alpha(self):
        with pytest.raises(InvalidInputError):
            LossWeights(-.1)


class TestGradients:

    @pytest.mark.parametrize('seed', range(20))
    def test_matches_finite_differences(self, seed: int):
        params, batch = random_problem(seed)
        weights = LossWeights([.3, 1.][seed % 2])

        assert finite_diff_check(params, batch, weights) < 1e-5

    def test_smallest_model_at_zero(self):
        rng = np.random.default_rng(4)
        batch = PixelBatch(rng.normal(size=(5, 1)), rng.uniform(0., 1., size=(5, 1)), [0, 1, 1, 0, 1])

        assert finite_diff_check(ToyModelParams.zeros(1, 1, m=1), batch, LossWeights(.3)) < 1e-6

    def test_detects_a_corrupted_gradient(self):
        params, batch = random_problem(5)
        weights = LossWeights(.3)
        grads = gradients(params, batch, weights)
        arrays = {name: np.array(arr) for name, arr in grads.arrays().items()}
        a_h = arrays['a_h']
        idx = np.unravel_index(np.argmax(np.abs(a_h)), a_h.shape)
        a_h[idx] *= 2.

        error = finite_diff_check(params, batch, weights, grads=ToyModelParams.from_arrays(arrays))

        assert error > .4

    def test_gradient_is_linear_in_alpha(self):
        params, batch = random_problem(6)

        seg_only = gradients(params, batch, LossWeights(0.))
        recon_and_seg = gradients(params, batch, LossWeights(1.))
        mixed = gradients(params, batch, LossWeights(.3))

        for name in PARAM_NAMES:
            recon_part = recon_and_seg.arrays()[name] - seg_only.arrays()[name]
            expected = seg_only.arrays()[name] + .3 * recon_part
            assert np.allclose(mixed.arrays()[name], expected, rtol=1e-10, atol=1e-12)

    def test_seg_only_gradient_ignores_the_target(self):
        params, batch = random_problem(7)
        other = PixelBatch(batch.features, np.zeros_like(batch.od_target), batch.labels)

        g1 = gradients(params, batch, LossWeights(0.))
        g2 = gradients(params, other, LossWeights(0.))

        assert g1 == g2

    def test_saturated_inputs_are_finite(self):
        params, batch = random_problem(8, scale=50.)

        grads = gradients(params, batch, LossWeights(.3))

        assert all(np.all(np.isfinite(arr)) for arr in grads.arrays().values())

    def test_incompatible_batch(self):
        params, _ = random_problem(9, d=4)
        _, batch = random_problem(9, d=3)

        with pytest.raises(InvalidInputError):
            gradients(params, batch, LossWeights())

    def test_bad_epsilon(self):
        params, batch = random_problem(10)

        with pytest.raises(InvalidInputError):
            finite_diff_check(params, batch, LossWeights(), epsilon=0.)
