import warnings

import numpy as np
from skimage import color as skcolor

from staintk.errors import InvalidInputError
from staintk.model import RgbImage, LabImage, ChannelStats
from staintk.util import validate_instance


def rgb_to_lab(img: RgbImage) -> LabImage:
    """
    Convert an sRGB image into CIELAB (D65 white point, `L` in :math:`[0, 100]`).

    :param img: the RGB image.
    :return: the LAB image with the same dimensions.
    """
    img = validate_instance(img, RgbImage, 'img')
    return LabImage(skcolor.rgb2lab(img.data.astype(float) / 255., illuminant='D65', observer='2'))


def lab_to_rgb(img: LabImage) -> RgbImage:
    """
    Convert a CIELAB image (D65) into an 8-bit sRGB image, clamping the out-of-gamut colors.

    :param img: the LAB image.
    :return: the RGB image with the same dimensions.
    """
    img = validate_instance(img, LabImage, 'img')
    return RgbImage(lab_values_to_rgb_array(img.values))


def lab_values_to_rgb_array(values: np.ndarray) -> np.ndarray:
    """
    Convert a `(height, width, 3)` array of LAB values into a `uint8` RGB array.
    """
    with warnings.catch_warnings():
        # skimage warns when clipping the negative Z values of out-of-gamut colors. We clip anyway.
        warnings.simplefilter('ignore', category=UserWarning)
        rgb = skcolor.lab2rgb(values, illuminant='D65', observer='2')
    return np.clip(np.rint(rgb * 255.), 0, 255).astype(np.uint8)


def channel_stats(img: LabImage) -> ChannelStats:
    """
    Compute the population mean and standard deviation of each channel.

    :param img: the LAB image with at least one pixel.
    :return: the channel statistics.
    :raises InvalidInputError: if the image has no pixels.
    """
    img = validate_instance(img, LabImage, 'img')
    if img.n_pixels < 1:
        raise InvalidInputError('Cannot compute channel statistics of an empty image')
    pixels = img.values.reshape(-1, 3)
    # Shifting by the first pixel keeps the std of a constant channel exactly zero.
    origin = pixels[0]
    shifted = pixels - origin
    return ChannelStats(mean=origin + shifted.mean(axis=0), std=shifted.std(axis=0))
