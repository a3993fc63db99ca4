import logging
import os
import typing

import numpy as np
from PIL import Image

from staintk.errors import FormatError
from staintk.model import RgbImage, SegMask
from staintk.util import validate_instance

logger = logging.getLogger(__name__)

PathLike = typing.Union[str, os.PathLike]

MASK_THRESHOLD = 127
"""
Mask pixels with a value greater than the threshold are positive.
"""

# 8-bit modes that have an unambiguous RGB reading.
_COLOR_MODES = frozenset({'1', 'L', 'LA', 'P', 'PA', 'RGB', 'RGBA', 'RGBX'})


def _open(path: PathLike) -> Image.Image:
    try:
        pil = Image.open(path)
        pil.load()
    except FileNotFoundError:
        raise
    except (OSError, SyntaxError, EOFError) as e:
        raise FormatError(f'Cannot read image {os.fspath(path)}: {e}') from e
    if pil.mode not in _COLOR_MODES:
        pil.close()
        raise FormatError(f'Unsupported image mode {pil.mode!r} of {os.fspath(path)}, expected 8-bit RGB or gray')
    return pil


def read_image(path: PathLike) -> RgbImage:
    """
    Read an 8-bit image as RGB. Gray images are expanded to `r = g = b` and alpha is dropped.

    :param path: path to the image file.
    :raises FileNotFoundError: if the file does not exist.
    :raises FormatError: if the file is not an image, is truncated, or has an unsupported bit depth.
    """
    with _open(path) as pil:
        data = np.asarray(pil.convert('RGB'), dtype=np.uint8)
    logger.debug('Read %s image of %d×%d pixels', os.fspath(path), data.shape[0], data.shape[1])
    return RgbImage(data)


def write_image(img: RgbImage, path: PathLike):
    """
    Write the image losslessly, e.g. as PNG. The format is chosen by the file suffix.
    """
    img = validate_instance(img, RgbImage, 'img')
    try:
        Image.fromarray(np.ascontiguousarray(img.data)).save(path)
    except ValueError as e:
        raise FormatError(f'Cannot write image {os.fspath(path)}: {e}') from e


def read_mask(path: PathLike) -> SegMask:
    """
    Read a binary mask from a gray image or from an RGB image whose channels agree.

    A pixel is positive iff its value is greater than `127`.

    :raises FileNotFoundError: if the file does not exist.
    :raises FormatError: if the file is not an image, has an unsupported bit depth, or has disagreeing channels.
    """
    with _open(path) as pil:
        if pil.mode in ('1', 'L', 'LA'):
            values = np.asarray(pil.convert('L'), dtype=np.uint8)
        else:
            rgb = np.asarray(pil.convert('RGB'), dtype=np.uint8)
            if not (np.array_equal(rgb[..., 0], rgb[..., 1]) and np.array_equal(rgb[..., 0], rgb[..., 2])):
                raise FormatError(f'Mask {os.fspath(path)} has color channels that disagree')
            values = rgb[..., 0]
    return SegMask(values > MASK_THRESHOLD)


def write_mask(mask: SegMask, path: PathLike):
    """
    Write the mask as an 8-bit gray image with values `0` and `255`.
    """
    mask = validate_instance(mask, SegMask, 'mask')
    values = np.where(mask.values, 255, 0).astype(np.uint8)
    try:
        Image.fromarray(values).save(path)
    except ValueError as e:
        raise FormatError(f'Cannot write mask {os.fspath(path)}: {e}') from e


def write_gray_image(values: np.ndarray, path: PathLike):
    """
    Write a `(height, width)` array of 8-bit values as a gray image, e.g. a stain density map.
    """
    values = np.asarray(values)
    if values.ndim != 2 or values.dtype != np.uint8:
        raise FormatError(f'Gray image must be a 2D `uint8` array but was {values.dtype} with shape {values.shape}')
    try:
        Image.fromarray(np.ascontiguousarray(values)).save(path)
    except ValueError as e:
        raise FormatError(f'Cannot write image {os.fspath(path)}: {e}') from e
