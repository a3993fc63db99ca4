import numpy as np
import pytest

from staintk.color import rgb_to_lab, channel_stats
from staintk.errors import InvalidInputError, ParseError
from staintk.model import RgbImage
from staintk.util import make_rng

from ._prior import StatPrior, fit_stat_prior, randstainna_augment


def random_image(seed: int, height: int = 8, width: int = 8) -> RgbImage:
    rng = np.random.default_rng(seed)
    return RgbImage(rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8))


def gray(value: int) -> RgbImage:
    return RgbImage(np.full((4, 4, 3), value, dtype=np.uint8))


def own_prior(img: RgbImage) -> StatPrior:
    stats = channel_stats(rgb_to_lab(img))
    return StatPrior(stats.mean, np.zeros(3), stats.std, np.zeros(3), n_images=1)


class TestFitStatPrior:

    def test_identical_images(self):
        img = random_image(1)

        prior = fit_stat_prior([img, img, img])

        stats = channel_stats(rgb_to_lab(img))
        assert prior.n_images == 3
        assert np.allclose(prior.mu_mean, stats.mean, rtol=0., atol=1e-12)
        assert np.allclose(prior.mu_std, stats.std, rtol=0., atol=1e-12)
        assert np.allclose(prior.sigma_mean, 0., atol=1e-12)
        assert np.allclose(prior.sigma_std, 0., atol=1e-12)

    def test_two_point_population_std(self):
        dark, light = gray(60), gray(160)
        l_dark = channel_stats(rgb_to_lab(dark)).mean[0]
        l_light = channel_stats(rgb_to_lab(light)).mean[0]

        prior = fit_stat_prior([dark, light])

        assert prior.mu_mean[0] == pytest.approx((l_dark + l_light) / 2., abs=1e-9)
        assert prior.sigma_mean[0] == pytest.approx(abs(l_light - l_dark) / 2., abs=1e-9)
        assert prior.sigma_std[0] == pytest.approx(0., abs=1e-9)

    def test_matches_two_pass_oracle(self):
        corpus = [random_image(seed, 6, 5) for seed in range(50)]

        prior = fit_stat_prior(corpus)

        means = []
        stds = []
        for img in corpus:
            pixels = rgb_to_lab(img).values.reshape(-1, 3)
            mean = [sum(pixels[:, c]) / len(pixels) for c in range(3)]
            var = [sum((pixels[:, c] - mean[c]) ** 2) / len(pixels) for c in range(3)]
            means.append(mean)
            stds.append(np.sqrt(var))
        means = np.array(means)
        stds = np.array(stds)
        for c in range(3):
            mu = sum(means[:, c]) / 50
            assert prior.mu_mean[c] == pytest.approx(mu, abs=1e-9)
            assert prior.sigma_mean[c] == pytest.approx(np.sqrt(sum((means[:, c] - mu) ** 2) / 50), abs=1e-9)
            mu_std = sum(stds[:, c]) / 50
            assert prior.mu_std[c] == pytest.approx(mu_std, abs=1e-9)
            assert prior.sigma_std[c] == pytest.approx(np.sqrt(sum((stds[:, c] - mu_std) ** 2) / 50), abs=1e-9)

    def test_empty_corpus(self):
        with pytest.raises(InvalidInputError):
            fit_stat_prior([])


class TestStatPrior:

    def test_json(self):
        prior = fit_stat_prior([random_image(1), random_image(2)])

        assert StatPrior.from_json(prior.to_json()) == prior
        assert set(prior.to_dict()['channels']['L']) == {'mu_mean', 'sigma_mean', 'mu_std', 'sigma_std'}

    @pytest.mark.parametrize('text', [
        '{"n_images": 1}',
        '{"channels": {"L": {}, "a": {}, "b": {}}, "n_images": 1}',
        'not json',
    ])
    def test_malformed_json(self, text):
        with pytest.raises(ParseError):
            StatPrior.from_json(text)

    def test_negative_sigma(self):
        with pytest.raises(InvalidInputError):
            StatPrior([0.] * 3, [-1., 0., 0.], [1.] * 3, [0.] * 3, n_images=1)


class TestRandstainnaAugment:

    def test_own_statistics_keep_the_image(self):
        img = random_image(17, 16, 16)

        out = randstainna_augment(img, own_prior(img), make_rng(0))

        diff = np.abs(out.data.astype(int) - img.data.astype(int))
        assert diff.max() <= 2

    def test_constant_image_gets_target_mean(self):
        target = np.array([60., 5., -5.])
        prior = StatPrior(target, np.zeros(3), [10., 10., 10.], np.zeros(3), n_images=1)

        out = randstainna_augment(gray(128), prior, make_rng(0))

        pixels = out.data.reshape(-1, 3)
        assert np.all(pixels == pixels[0])
        lab = channel_stats(rgb_to_lab(out)).mean
        assert np.allclose(lab, target, atol=1.)

    def test_constant_color_gets_target_statistics(self):
        img = RgbImage(np.tile(np.array([200, 120, 150], dtype=np.uint8), (6, 5, 1)))
        target = np.array([50., 10., -10.])
        prior = StatPrior(target, np.zeros(3), [10., 5., 5.], np.zeros(3), n_images=1)

        out = randstainna_augment(img, prior, make_rng(0))

        stats = channel_stats(rgb_to_lab(out))
        assert np.allclose(stats.mean, target, atol=1.)
        assert stats.std.tolist() == [0., 0., 0.]

    def test_is_deterministic(self):
        img = random_image(3)
        prior = fit_stat_prior([random_image(s) for s in range(5)])

        assert randstainna_augment(img, prior, make_rng(4)) == randstainna_augment(img, prior, make_rng(4))

    def test_distinct_seeds_give_distinct_images(self):
        img = random_image(3, 16, 16)
        prior = StatPrior([55., 10., -5.], [5., 3., 3.], [15., 8., 8.], [2., 1., 1.], n_images=10)

        outputs = {randstainna_augment(img, prior, make_rng(seed)) for seed in range(100)}

        assert len(outputs) >= 99
