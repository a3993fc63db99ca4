import logging
import typing

import numpy as np

from staintk.color import rgb_to_od, od_values_to_rgb_array
from staintk.model import RgbImage, StainMatrix, StainDensity, normalize_columns
from staintk.stainsep import SeparationConfig, estimate_stains, project_density
from staintk.util import derive_seed, validate_instance

from ._config import PerturbConfig

logger = logging.getLogger(__name__)


def perturb_stain_matrix(stains: StainMatrix,
                         cfg: PerturbConfig,
                         rng: np.random.Generator) -> StainMatrix:
    """
    Multiply each entry of the stain matrix by an independent log-normal factor and renormalize the columns.

    The column order is kept.

    >>> import numpy as np
    >>> from staintk.constants import HEMATOXYLIN, EOSIN
    >>> w = StainMatrix.from_columns([HEMATOXYLIN, EOSIN])
    >>> perturb_stain_matrix(w, PerturbConfig(scale_sigma=0.), np.random.default_rng(0)) == w
    True

    :param stains: the stain matrix.
    :param cfg: the perturbation parameters.
    :param rng: the random generator.
    :return: the perturbed stain matrix.
    """
    stains = validate_instance(stains, StainMatrix, 'stains')
    if cfg.scale_sigma == 0.:
        return stains
    factors = np.exp(rng.normal(0., cfg.scale_sigma, size=stains.values.shape))
    return StainMatrix(normalize_columns(stains.values * factors))


class StainAugmentation:
    """
    The outcome of :func:`stain_augment`.

    :param image: the augmented image, or the input image if the augmentation fell back to identity.
    :param stains: the perturbed stain matrix or `None` for the fallback.
    :param density: the density shared by the input and the output or `None` for the fallback.
    :param attempts: the number of separations that were run.
    """

    def __init__(self, image: RgbImage,
                 stains: typing.Optional[StainMatrix],
                 density: typing.Optional[StainDensity],
                 attempts: int):
        self._image = image
        self._stains = stains
        self._density = density
        self._attempts = attempts

    @property
    def image(self) -> RgbImage:
        return self._image

    @property
    def stains(self) -> typing.Optional[StainMatrix]:
        return self._stains

    @property
    def density(self) -> typing.Optional[StainDensity]:
        return self._density

    @property
    def attempts(self) -> int:
        return self._attempts

    @property
    def fell_back(self) -> bool:
        """
        `True` if every separation was degenerate and the input was returned unchanged.
        """
        return self._stains is None

    def __repr__(self):
        return f'StainAugmentation(fell_back={self.fell_back}, attempts={self._attempts})'


def stain_augment(img: RgbImage,
                  cfg: SeparationConfig,
                  pcfg: PerturbConfig,
                  rng: np.random.Generator) -> StainAugmentation:
    """
    Augment the image by perturbing its stain matrix while keeping the stain densities.

    We separate `img` into `W` and `H`, perturb `W` with :func:`perturb_stain_matrix`, and render the perturbed
    `W` with the unchanged `H`. The OD residual that the fitted `W` does not explain is kept.
    A degenerate separation is retried with seeds derived from `cfg.seed` and the input is returned unchanged
    if all `pcfg.max_attempts` separations are degenerate.

    :raises InsufficientTissueError: if `img` has too little tissue.
    """
    img = validate_instance(img, RgbImage, 'img')
    od = rgb_to_od(img, cfg.i0)

    for attempt in range(pcfg.max_attempts):
        attempt_cfg = cfg if attempt == 0 else cfg.with_seed(derive_seed(cfg.seed, attempt))
        separation = estimate_stains(od, attempt_cfg)
        if not separation.degenerate:
            break
        logger.debug('Degenerate separation on attempt %d', attempt + 1)
    else:
        logger.warning('Stain separation stayed degenerate after %d attempts, keeping the input', pcfg.max_attempts)
        return StainAugmentation(img, None, None, pcfg.max_attempts)

    perturbed = perturb_stain_matrix(separation.stains, pcfg, rng)
    density = project_density(separation.stains, od)
    residual = od.values - separation.stains.values @ density.values
    values = perturbed.values @ density.values + residual
    image = RgbImage(od_values_to_rgb_array(values, img.height, img.width, cfg.i0))
    return StainAugmentation(image, perturbed, density, attempt + 1)
