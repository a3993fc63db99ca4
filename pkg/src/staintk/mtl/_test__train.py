import csv
import io
import json

import numpy as np
import pytest

from staintk.constants import HEMATOXYLIN, EOSIN
from staintk.errors import InvalidInputError, NonFiniteLossError

from ._loss import LossWeights
from ._model import ToyModelParams, PixelBatch
from ._train import train, alpha_grid_search, AlphaScore, AlphaGridResult, TrainingTrace


def separable_batch(seed: int, n: int = 200) -> PixelBatch:
    """
    Pixels whose label is decided by a high hematoxylin density.
    """
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, size=n)
    h0 = np.where(labels == 1, rng.uniform(1.2, 2., size=n), rng.uniform(0., .3, size=n))
    h1 = rng.uniform(0., .5, size=n)
    stains = np.column_stack([HEMATOXYLIN, EOSIN])
    od = np.column_stack([h0, h1]) @ stains.T
    return PixelBatch(od, od, labels)


class TestTrain:

    def test_loss_decreases_on_a_separable_task(self):
        batch = separable_batch(1)
        params = ToyModelParams.random(3, 2, np.random.default_rng(2), scale=.5)

        _, trace = train(params, [batch], LossWeights(.3), lr=.3, steps=500)

        totals = trace.totals()
        assert len(trace) == 500
        assert np.all(np.isfinite(totals))
        assert totals[-1] < .5 * totals[0]

    def test_zero_learning_rate_keeps_the_params(self):
        batch = separable_batch(3, n=20)
        params = ToyModelParams.random(3, 2, np.random.default_rng(4))

        trained, trace = train(params, [batch], LossWeights(), lr=0., steps=5)

        assert trained == params
        assert len(set(trace.totals().tolist())) == 1

    def test_is_deterministic(self):
        batches = [separable_batch(seed, n=30) for seed in range(3)]
        params = ToyModelParams.random(3, 2, np.random.default_rng(5))

        first = train(params, batches, LossWeights(), lr=.1, steps=10, seed=7)
        second = train(params, batches, LossWeights(), lr=.1, steps=10, seed=7)

        assert first[0] == second[0]
        assert first[1] == second[1]

    def test_visits_every_batch_each_pass(self):
        batches = [separable_batch(seed, n=10) for seed in range(4)]
        params = ToyModelParams.random(3, 2, np.random.default_rng(6))

        _, trace = train(params, batches, LossWeights(), lr=0., steps=8)

        first_pass = sorted(trace.totals()[:4].tolist())
        second_pass = sorted(trace.totals()[4:].tolist())
        assert first_pass == second_pass
        assert len(set(first_pass)) == 4

    def test_non_finite_loss(self):
        batch = PixelBatch(np.full((2, 1), 1e200), np.zeros((2, 1)), [0, 1])
        params = ToyModelParams(a_h=[[1e200]], b_h=[0.], a_w=[[1e200]], b_w=[0.], a_c=[0., 0.], b_c=0.)

        with np.errstate(over='ignore', invalid='ignore'):
            with pytest.raises(NonFiniteLossError) as e:
                train(params, [batch], LossWeights(1.), lr=.1, steps=3)

        assert e.value.step == 0

    @pytest.mark.parametrize('kwargs', [
        {'lr': -.1, 'steps': 1},
        {'lr': .1, 'steps': 0},
    ])
    def test_bad_arguments(self, kwargs):
        params = ToyModelParams.zeros(3, 2)

        with pytest.raises(InvalidInputError):
            train(params, [separable_batch(0, n=5)], LossWeights(), **kwargs)

    def test_no_batches(self):
        with pytest.raises(InvalidInputError):
            train(ToyModelParams.zeros(3, 2), [], LossWeights(), lr=.1, steps=1)


class TestTrainingTrace:

    def test_csv(self):
        trace = TrainingTrace([(0, 1., .5, .8), (1, .5, .25, .4)])
        buf = io.StringIO()

        trace.to_csv(buf)

        rows = list(csv.reader(io.StringIO(buf.getvalue())))
        assert rows[0] == ['step', 'recon', 'seg', 'total']
        assert rows[1:] == [['0', '1.0', '0.5', '0.8'], ['1', '0.5', '0.25', '0.4']]


class TestAlphaGrid:

    def test_scores_every_alpha(self):
        params = ToyModelParams.random(3, 2, np.random.default_rng(8), scale=.5)

        result = alpha_grid_search(params, [separable_batch(9, n=60)], [separable_batch(10, n=60)],
                                   alphas=[1., .1], lr=.3, steps=50)

        assert [s.alpha for s in result.scores] == [.1, 1.]
        assert result.best_alpha in (.1, 1.)
        for score in result.scores:
            assert 0. <= score.dice <= 1.
            assert score.cosas == pytest.approx((score.dice + score.iou) / 2.)
        data = json.loads(result.to_json())
        assert data['best_alpha'] == result.best_alpha

    def test_ties_go_to_the_smaller_alpha(self):
        result = AlphaGridResult([AlphaScore(1., .1, .5, .5, .5), AlphaScore(.3, .2, .5, .5, .5),
                                  AlphaScore(2., .1, .4, .4, .4)])

        assert result.best_alpha == .3

    def test_highest_cosas_wins(self):
        result = AlphaGridResult([AlphaScore(.1, .1, .5, .5, .5), AlphaScore(1., .2, .7, .6, .65)])

        assert result.best_alpha == 1.

    def test_empty_grid(self):
        with pytest.raises(InvalidInputError):
            AlphaGridResult([])
