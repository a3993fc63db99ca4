import math

import numpy as np
import pytest

from staintk.errors import InvalidInputError, ParseError

from ._model import ToyModelParams, PixelBatch, forward, softplus, sigmoid


def random_batch(rng: np.random.Generator, n: int = 12, d: int = 3, m: int = 3) -> PixelBatch:
    return PixelBatch(rng.normal(size=(n, d)), rng.uniform(0., 2., size=(n, m)), rng.integers(0, 2, size=n))


class TestActivations:

    def test_softplus_is_stable(self):
        z = np.array([-800., -1., 0., 1., 800.])

        values = softplus(z)

        assert np.all(np.isfinite(values))
        assert values[2] == pytest.approx(math.log(2.))
        assert values[4] == pytest.approx(800.)
        assert values[0] == pytest.approx(0.)

    def test_sigmoid_is_stable(self):
        z = np.array([-800., 0., 800.])

        values = sigmoid(z)

        assert values.tolist() == pytest.approx([0., .5, 1.])


class TestForward:

    def test_zero_params(self):
        params = ToyModelParams.zeros(d=3, r=2)
        batch = random_batch(np.random.default_rng(1), n=5)

        res = forward(params, batch)

        assert res.h_hat.shape == (5, 2)
        assert res.w_hat.shape == (5, 3, 2)
        assert np.allclose(res.h_hat, math.log(2.))
        assert np.allclose(res.w_hat, math.log(2.))
        assert np.array_equal(res.logits, np.zeros(5))
        assert np.allclose(res.recon, 2. * math.log(2.) ** 2)

    def test_single_stain_single_channel(self):
        params = ToyModelParams(a_h=[[.5]], b_h=[.1], a_w=[[-.3]], b_w=[.2], a_c=[.7, -.4], b_c=.05)
        batch = PixelBatch([[1.5]], [[.2]], [1])

        res = forward(params, batch)

        h = math.log1p(math.exp(.5 * 1.5 + .1))
        w = math.log1p(math.exp(-.3 * 1.5 + .2))
        assert res.h_hat[0, 0] == pytest.approx(h, abs=1e-12)
        assert res.w_hat[0, 0, 0] == pytest.approx(w, abs=1e-12)
        assert res.recon[0, 0] == pytest.approx(w * h, abs=1e-12)
        assert res.logits[0] == pytest.approx(.7 * h - .4 * w + .05, abs=1e-12)

    def test_pixels_are_independent(self):
        rng = np.random.default_rng(5)
        params = ToyModelParams.random(3, 2, rng, scale=.5)
        batch = random_batch(rng, n=20)
        perm = rng.permutation(20)

        res = forward(params, batch)
        permuted = forward(params, batch.take(perm))

        assert np.allclose(permuted.logits, res.logits[perm], rtol=0., atol=1e-12)
        assert np.allclose(permuted.recon, res.recon[perm], rtol=0., atol=1e-12)

    def test_outputs_are_non_negative(self):
        rng = np.random.default_rng(9)
        params = ToyModelParams.random(3, 2, rng, scale=3.)

        res = forward(params, random_batch(rng, n=50))

        assert np.all(res.h_hat >= 0.)
        assert np.all(res.w_hat >= 0.)
        assert np.all(res.recon >= 0.)

    def test_incompatible_batch(self):
        params = ToyModelParams.zeros(d=6, r=2)

        with pytest.raises(InvalidInputError):
            forward(params, random_batch(np.random.default_rng(0), d=3))
        with pytest.raises(InvalidInputError):
            forward(ToyModelParams.zeros(d=3, r=2, m=1), random_batch(np.random.default_rng(0)))


class TestToyModelParams:

    def test_shapes(self):
        params = ToyModelParams.zeros(d=4, r=2, m=3)

        assert (params.d, params.r, params.m) == (4, 2, 3)
        assert params.n_params() == 4 * 2 + 2 + 4 * 6 + 6 + 8 + 1

    def test_single_channel(self):
        params = ToyModelParams.zeros(d=1, r=1, m=1)

        assert params.m == 1
        assert params.a_c.shape == (2,)

    @pytest.mark.parametrize('name, value', [
        ('a_h', np.zeros((3,))),
        ('b_h', np.zeros((3,))),
        ('a_c', np.zeros((7,))),
        ('b_w', np.zeros((5,))),
    ])
    def test_bad_shapes(self, name: str, value):
        arrays = dict(ToyModelParams.zeros(d=3, r=2).arrays())
        arrays[name] = value

        with pytest.raises(InvalidInputError):
            ToyModelParams.from_arrays(arrays)

    def test_non_finite(self):
        arrays = dict(ToyModelParams.zeros(d=3, r=2).arrays())
        arrays['b_c'] = np.nan

        with pytest.raises(InvalidInputError):
            ToyModelParams.from_arrays(arrays)

    def test_combine(self):
        rng = np.random.default_rng(3)
        a = ToyModelParams.random(3, 2, rng)
        b = ToyModelParams.random(3, 2, rng)

        c = a.combine(b, -.5)

        assert np.allclose(c.a_w, a.a_w - .5 * b.a_w)
        assert c.b_c == pytest.approx(a.b_c - .5 * b.b_c)
        with pytest.raises(InvalidInputError):
            a.combine(ToyModelParams.zeros(3, 1), 1.)

    def test_json(self):
        params = ToyModelParams.random(3, 2, np.random.default_rng(11))

        assert ToyModelParams.from_json(params.to_json()) == params

    def test_malformed_json(self):
        with pytest.raises(ParseError):
            ToyModelParams.from_json('{"d": 3')
        with pytest.raises(ParseError):
            ToyModelParams.from_json('{"d": 3, "r": 2, "m": 3}')
        with pytest.raises(ParseError):
            ToyModelParams.from_json('[]')

    def test_params_are_read_only(self):
        params = ToyModelParams.zeros(3, 2)

        with pytest.raises(ValueError):
            params.a_h[0, 0] = 1.


class TestPixelBatch:

    def test_labels_must_be_binary(self):
        with pytest.raises(InvalidInputError):
            PixelBatch(np.zeros((2, 3)), np.zeros((2, 3)), [0, 2])

    def test_target_must_be_non_negative(self):
        with pytest.raises(InvalidInputError):
            PixelBatch(np.zeros((2, 3)), -np.ones((2, 3)), [0, 1])

    def test_lengths_must_agree(self):
        with pytest.raises(InvalidInputError):
            PixelBatch(np.zeros((2, 3)), np.zeros((3, 3)), [0, 1])
