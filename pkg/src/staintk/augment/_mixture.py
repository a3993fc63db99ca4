import logging
import typing

import numpy as np

from staintk.errors import InvalidInputError, InsufficientTissueError
from staintk.model import RgbImage, SegMask
from staintk.stainsep import SeparationConfig
from staintk.util import validate_instance, validate_optional_instance

from ._config import AugmentationBranch, MixturePolicy, PerturbConfig
from ._prior import StatPrior, randstainna_augment
from ._stain import stain_augment

logger = logging.getLogger(__name__)


class AugmentedSample:
    """
    An augmented image with its (untouched) segmentation mask and the branch that produced the image.
    """

    def __init__(self, image: RgbImage, mask: typing.Optional[SegMask], applied: AugmentationBranch):
        self._image = validate_instance(image, RgbImage, 'image')
        self._mask = validate_optional_instance(mask, SegMask, 'mask')
        self._applied = validate_instance(applied, AugmentationBranch, 'applied')

    @property
    def image(self) -> RgbImage:
        return self._image

    @property
    def mask(self) -> typing.Optional[SegMask]:
        return self._mask

    @property
    def applied(self) -> AugmentationBranch:
        return self._applied

    def __eq__(self, other):
        return isinstance(other, AugmentedSample) \
            and self._image == other._image \
            and self._mask == other._mask \
            and self._applied == other._applied

    def __hash__(self):
        return hash((self._image, self._mask, self._applied))

    def __repr__(self):
        return f'AugmentedSample(image={self._image!r}, mask={self._mask!r}, applied={self._applied.value})'


def mixture_augment(image: RgbImage,
                    mask: typing.Optional[SegMask],
                    policy: MixturePolicy,
                    rng: np.random.Generator,
                    prior: typing.Optional[StatPrior] = None,
                    cfg: typing.Optional[SeparationConfig] = None,
                    pcfg: typing.Optional[PerturbConfig] = None) -> AugmentedSample:
    """
    Apply one color augmentation branch drawn from the `policy`.

    The mask is never modified. The stain-separation branch falls back to the identity
    if the image has too little tissue or the separation stays degenerate.

    :param image: the image to augment.
    :param mask: the segmentation mask of the image or `None`.
    :param policy: the branch probabilities.
    :param rng: the random generator, the branch is drawn by the first variate.
    :param prior: the statistics prior, required if the RandStainNA branch is drawn.
    :param cfg: the separation parameters or `None` for the defaults.
    :param pcfg: the perturbation parameters or `None` for the defaults.
    """
    image = validate_instance(image, RgbImage, 'image')
    policy = validate_instance(policy, MixturePolicy, 'policy')
    branch = policy.draw(rng)

    if branch == AugmentationBranch.RANDSTAINNA:
        if prior is None:
            raise InvalidInputError('RandStainNA augmentation needs a stat prior')
        return AugmentedSample(randstainna_augment(image, prior, rng), mask, branch)
    elif branch == AugmentationBranch.STAIN_SEP:
        cfg = SeparationConfig() if cfg is None else cfg
        pcfg = PerturbConfig() if pcfg is None else pcfg
        try:
            result = stain_augment(image, cfg, pcfg, rng)
        except InsufficientTissueError as e:
            logger.debug('Skipping stain augmentation: %s', e)
            return AugmentedSample(image, mask, AugmentationBranch.IDENTITY)
        if result.fell_back:
            return AugmentedSample(image, mask, AugmentationBranch.IDENTITY)
        return AugmentedSample(result.image, mask, branch)
    else:
        return AugmentedSample(image, mask, AugmentationBranch.IDENTITY)
