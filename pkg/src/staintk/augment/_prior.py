import json
import logging
import typing

import numpy as np

from staintk.color import rgb_to_lab, lab_values_to_rgb_array, channel_stats
from staintk.errors import InvalidInputError, ParseError
from staintk.model import RgbImage
from staintk.util import validate_instance

logger = logging.getLogger(__name__)

LAB_CHANNELS = ('L', 'a', 'b')
MIN_TARGET_STD = .01
MIN_SOURCE_STD = 1e-8


class StatPrior:
    """
    Gaussian priors over the per-image means and standard deviations of the LAB channels of a template corpus.

    >>> prior = StatPrior([50., 10., -5.], [0., 0., 0.], [10., 4., 3.], [0., 0., 0.], n_images=1)
    >>> prior.mu_mean.tolist()
    [50.0, 10.0, -5.0]

    :param mu_mean: the mean of the per-image channel means.
    :param sigma_mean: the standard deviation of the per-image channel means.
    :param mu_std: the mean of the per-image channel standard deviations.
    :param sigma_std: the standard deviation of the per-image channel standard deviations.
    :param n_images: the number of images the prior was fitted on.
    """

    def __init__(self, mu_mean: typing.Sequence[float],
                 sigma_mean: typing.Sequence[float],
                 mu_std: typing.Sequence[float],
                 sigma_std: typing.Sequence[float],
                 n_images: int):
        self._mu_mean = _channel_array(mu_mean, 'mu_mean')
        self._sigma_mean = _channel_array(sigma_mean, 'sigma_mean')
        self._mu_std = _channel_array(mu_std, 'mu_std')
        self._sigma_std = _channel_array(sigma_std, 'sigma_std')
        if np.any(self._sigma_mean < 0.) or np.any(self._sigma_std < 0.):
            raise InvalidInputError('Prior standard deviations must be non-negative')
        if not isinstance(n_images, int) or n_images < 1:
            raise InvalidInputError(f'n_images must be a positive `int` but was {n_images!r}')
        self._n_images = n_images

    @property
    def mu_mean(self) -> np.ndarray:
        return self._mu_mean

    @property
    def sigma_mean(self) -> np.ndarray:
        return self._sigma_mean

    @property
    def mu_std(self) -> np.ndarray:
        return self._mu_std

    @property
    def sigma_std(self) -> np.ndarray:
        return self._sigma_std

    @property
    def n_images(self) -> int:
        return self._n_images

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        channels = {}
        for i, name in enumerate(LAB_CHANNELS):
            channels[name] = {
                'mu_mean': float(self._mu_mean[i]),
                'sigma_mean': float(self._sigma_mean[i]),
                'mu_std': float(self._mu_std[i]),
                'sigma_std': float(self._sigma_std[i]),
            }
        return {'channels': channels, 'n_images': self._n_images}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True) + '\n'

    @staticmethod
    def from_dict(data: typing.Mapping[str, typing.Any]) -> 'StatPrior':
        try:
            channels = [data['channels'][name] for name in LAB_CHANNELS]
            params = {
                field: [float(c[field]) for c in channels]
                for field in ('mu_mean', 'sigma_mean', 'mu_std', 'sigma_std')
            }
            n_images = data['n_images']
        except KeyError as ke:
            raise ParseError(f'Stat prior is missing field {ke.args[0]!r}')
        except (TypeError, ValueError) as e:
            raise ParseError(f'Malformed stat prior: {e}')
        if not isinstance(n_images, int):
            raise ParseError(f'n_images must be an integer but was {n_images!r}')
        return StatPrior(n_images=n_images, **params)

    @staticmethod
    def from_json(text: str) -> 'StatPrior':
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(f'Stat prior is not valid JSON: {e.msg}', e.lineno)
        if not isinstance(data, dict):
            raise ParseError('Stat prior must be a JSON object')
        return StatPrior.from_dict(data)

    def __eq__(self, other):
        return isinstance(other, StatPrior) \
            and self._n_images == other._n_images \
            and np.array_equal(self._mu_mean, other._mu_mean) \
            and np.array_equal(self._sigma_mean, other._sigma_mean) \
            and np.array_equal(self._mu_std, other._mu_std) \
            and np.array_equal(self._sigma_std, other._sigma_std)

    def __hash__(self):
        return hash((self._n_images, self._mu_mean.tobytes(), self._mu_std.tobytes()))

    def __repr__(self):
        return (f'StatPrior(mu_mean={self._mu_mean.tolist()}, sigma_mean={self._sigma_mean.tolist()}, '
                f'mu_std={self._mu_std.tolist()}, sigma_std={self._sigma_std.tolist()}, n_images={self._n_images})')


def fit_stat_prior(corpus: typing.Iterable[RgbImage]) -> StatPrior:
    """
    Fit the LAB statistics prior on a template corpus.

    The prior holds the population mean and standard deviation of the per-image channel means and stds.

    :param corpus: one or more RGB images.
    :raises InvalidInputError: if the corpus is empty.
    """
    means = []
    stds = []
    for img in corpus:
        stats = channel_stats(rgb_to_lab(validate_instance(img, RgbImage, 'img')))
        means.append(stats.mean)
        stds.append(stats.std)
    if len(means) == 0:
        raise InvalidInputError('Cannot fit the stat prior on an empty corpus')

    means = np.array(means)
    stds = np.array(stds)
    logger.debug('Fitted stat prior on %d images', len(means))
    return StatPrior(
        mu_mean=means.mean(axis=0),
        sigma_mean=means.std(axis=0),
        mu_std=stds.mean(axis=0),
        sigma_std=stds.std(axis=0),
        n_images=len(means),
    )


def randstainna_augment(img: RgbImage, prior: StatPrior, rng: np.random.Generator) -> RgbImage:
    """
    Recolor the image to channel statistics sampled from the `prior`.

    We sample the target mean and std of each LAB channel from the prior Gaussians (clamping the std at `0.01`)
    and apply the Reinhard transfer :math:`(x - μ) \\cdot σ_t / σ + μ_t`. A channel with std at or below `1e-8` is set
    to the target mean.

    :param img: the image to recolor.
    :param prior: the statistics prior.
    :param rng: the random generator.
    :return: the recolored image.
    """
    img = validate_instance(img, RgbImage, 'img')
    prior = validate_instance(prior, StatPrior, 'prior')

    target_mean = rng.normal(prior.mu_mean, prior.sigma_mean)
    target_std = np.maximum(rng.normal(prior.mu_std, prior.sigma_std), MIN_TARGET_STD)

    lab = rgb_to_lab(img)
    stats = channel_stats(lab)
    ratio = np.divide(target_std, stats.std, out=np.zeros(3), where=stats.std > MIN_SOURCE_STD)
    values = (lab.values - stats.mean) * ratio + target_mean
    return RgbImage(lab_values_to_rgb_array(values))


def _channel_array(values: typing.Sequence[float], name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.shape != (len(LAB_CHANNELS),):
        raise InvalidInputError(f'{name} must have {len(LAB_CHANNELS)} values but had shape {arr.shape}')
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f'{name} must be finite')
    arr.setflags(write=False)
    return arr
