import numpy as np

from staintk.errors import InvalidInputError
from staintk.model import RgbImage, OdImage
from staintk.util import validate_instance


def rgb_to_od(img: RgbImage, i0: float = 255.) -> OdImage:
    """
    Transform an RGB image into optical density using the Beer-Lambert law.

    Each channel value `v` maps to :math:`-\\ln((v + 1) / (i_0 + 1))`. The `+1` guard keeps the logarithm finite
    for black pixels and maps the reference intensity to exactly zero. Values brighter than `i0` are clipped to zero.

    >>> import numpy as np
    >>> from staintk.model import RgbImage
    >>> od = rgb_to_od(RgbImage(np.array([[[255, 255, 255], [0, 0, 0]]], dtype=np.uint8)))
    >>> np.round(od.values, 4).tolist()
    [[0.0, 5.5452], [0.0, 5.5452], [0.0, 5.5452]]

    :param img: the RGB image.
    :param i0: the reference (background) intensity in :math:`[1, 255]`.
    :return: the `3 × n` optical density image.
    """
    img = validate_instance(img, RgbImage, 'img')
    i0 = _check_i0(i0)
    pixels = img.pixels().astype(float)
    od = np.log((i0 + 1.) / (pixels + 1.))
    return OdImage(np.maximum(od, 0.), img.height, img.width)


def od_to_rgb(od: OdImage, i0: float = 255.) -> RgbImage:
    """
    Invert :func:`rgb_to_od`, rounding to the nearest 8-bit value and clamping to :math:`[0, 255]`.

    :param od: the optical density image with `m = 3` channels.
    :param i0: the reference intensity used in the forward transform.
    :return: the RGB image.
    """
    od = validate_instance(od, OdImage, 'od')
    if od.m != 3:
        raise InvalidInputError(f'Only 3-channel OD images can be converted to RGB but got {od.m} channels')
    i0 = _check_i0(i0)
    return RgbImage(od_values_to_rgb_array(od.values, od.height, od.width, i0))


def od_values_to_rgb_array(values: np.ndarray, height: int, width: int, i0: float = 255.) -> np.ndarray:
    """
    Convert a `(3, n)` array of optical densities into a `(height, width, 3)` `uint8` array.
    """
    v = np.rint((i0 + 1.) * np.exp(-values) - 1.)
    v = np.clip(v, 0, 255).astype(np.uint8)
    return v.T.reshape(height, width, 3)


def _check_i0(i0: float) -> float:
    i0 = float(i0)
    if not 1. <= i0 <= 255.:
        raise InvalidInputError(f'Reference intensity must be in [1, 255] but was {i0}')
    return i0
