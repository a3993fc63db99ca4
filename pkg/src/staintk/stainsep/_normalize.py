import typing

import numpy as np

from staintk.color import rgb_to_od, od_values_to_rgb_array
from staintk.errors import InvalidInputError
from staintk.model import RgbImage
from staintk.util import validate_instance

from ._config import SeparationConfig
from ._nmf import estimate_stains, density_percentile, project_density
from ._profile import StainProfile, DEFAULT_PERCENTILE


def normalize_spcn(src: RgbImage,
                   target: StainProfile,
                   cfg: typing.Optional[SeparationConfig] = None,
                   percentile: float = DEFAULT_PERCENTILE) -> RgbImage:
    """
    Normalize the colors of `src` to the `target` profile while preserving the tissue structure.

    We separate `src` into the stain matrix and the densities, scale each density row so that its robust maximum
    matches the target scale, and recombine the densities with the target stains.
    The residual of the source OD that the source stains do not explain is added back, hence normalizing
    an image to its own profile returns the image.
    The ratios between the densities of any two pixels of a stain are unchanged.

    :param src: the image to normalize.
    :param target: the target profile, e.g. from :func:`fit_profile`.
    :param cfg: the separation parameters or `None` for the defaults.
    :param percentile: the percentile used for the source density scales.
    :return: the normalized image.
    :raises InsufficientTissueError: if `src` has too little tissue.
    """
    src = validate_instance(src, RgbImage, 'src')
    target = validate_instance(target, StainProfile, 'target').canonical()
    cfg = SeparationConfig() if cfg is None else cfg
    if target.r != cfg.n_stains:
        raise InvalidInputError(f'Target profile has {target.r} stains but the config asks for {cfg.n_stains}')

    od = rgb_to_od(src, cfg.i0)
    separation = estimate_stains(od, cfg)
    src_density = project_density(separation.stains, od)
    src_scale = density_percentile(src_density, percentile)
    # A stain absent from the source keeps its (zero) densities.
    ratio = np.divide(target.density_scale, src_scale,
                      out=np.ones_like(src_scale), where=src_scale > 0.)
    density = src_density.values * ratio[:, None]
    # The part of the OD the source stains do not explain is carried over unchanged.
    residual = od.values - separation.stains.values @ src_density.values
    values = target.stains.values @ density + residual
    return RgbImage(od_values_to_rgb_array(values, src.height, src.width, cfg.i0))
