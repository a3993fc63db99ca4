import typing

import numpy as np

from staintk.errors import InvalidInputError
from staintk.model import RgbImage, SegMask
from staintk.util import validate_instance, validate_optional_instance


def flip(image: RgbImage,
         mask: typing.Optional[SegMask],
         horizontal: bool,
         vertical: bool) -> typing.Tuple[RgbImage, typing.Optional[SegMask]]:
    """
    Mirror the image and the mask left-right (`horizontal`) and/or upside-down (`vertical`).
    """
    image = validate_instance(image, RgbImage, 'image')
    mask = validate_optional_instance(mask, SegMask, 'mask')
    if mask is not None and mask.shape != (image.height, image.width):
        raise InvalidInputError(f'Mask shape {mask.shape} does not match the image {image.height}×{image.width}')

    data = image.data
    values = None if mask is None else mask.values
    if horizontal:
        data = data[:, ::-1]
        values = None if values is None else values[:, ::-1]
    if vertical:
        data = data[::-1]
        values = None if values is None else values[::-1]
    return RgbImage(data), None if values is None else SegMask(values)


def geometric_augment(image: RgbImage,
                      mask: typing.Optional[SegMask],
                      rng: np.random.Generator) -> typing.Tuple[RgbImage, typing.Optional[SegMask]]:
    """
    Flip the image and the mask horizontally and vertically, each with probability `0.5`.

    The horizontal flip is decided by the first variate of `rng` and the vertical one by the second.

    :raises InvalidInputError: if the mask and the image dimensions differ.
    """
    horizontal = rng.random() < .5
    vertical = rng.random() < .5
    return flip(image, mask, horizontal, vertical)
