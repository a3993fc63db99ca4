import enum
import typing

import numpy as np

from staintk.errors import InvalidInputError
from staintk.model import RgbImage
from staintk.util import validate_instance

Predictor = typing.Callable[[RgbImage], np.ndarray]
"""
A callable that maps an image to a `(height, width)` array of logits.
"""

_PROBABILITY_CLIP = 1e-12


class TtaSpace(enum.Enum):
    """
    The scale in which the predictions of the orientations are averaged.
    """

    LOGIT = 'logit'
    PROBABILITY = 'probability'


def tta_predict(predict: Predictor, img: RgbImage, space: TtaSpace = TtaSpace.LOGIT) -> np.ndarray:
    """
    Predict the image in all four 90° orientations and average the back-rotated predictions.

    With :attr:`TtaSpace.PROBABILITY`, the logits are turned into probabilities before averaging and the mean
    is returned on the logit scale again. The averaging is exact for a rotation-equivariant predictor.

    >>> import numpy as np
    >>> from staintk.model import RgbImage
    >>> img = RgbImage(np.zeros((2, 3, 3), dtype=np.uint8))
    >>> tta_predict(lambda x: np.full((x.height, x.width), 1.5), img).tolist()
    [[1.5, 1.5, 1.5], [1.5, 1.5, 1.5]]

    :param predict: the predictor.
    :param img: the image.
    :param space: the averaging space.
    :return: a `(height, width)` array of logits.
    :raises InvalidInputError: if the predictor returns an array of wrong dimensions.
    """
    img = validate_instance(img, RgbImage, 'img')
    space = TtaSpace(space)
    maps = []
    for k in (1, 2, 3, 4):
        rotated = RgbImage(np.rot90(img.data, k))
        out = np.asarray(predict(rotated), dtype=float)
        if out.shape != (rotated.height, rotated.width):
            raise InvalidInputError(f'Predictor returned shape {out.shape} for a '
                                    f'{rotated.height}×{rotated.width} image')
        out = np.rot90(out, -k)
        if space == TtaSpace.PROBABILITY:
            out = np.exp(-np.logaddexp(0., -out))
        maps.append(out)

    mean = ((maps[0] + maps[1]) + (maps[2] + maps[3])) / 4.
    if space == TtaSpace.PROBABILITY:
        mean = np.clip(mean, _PROBABILITY_CLIP, 1. - _PROBABILITY_CLIP)
        mean = np.log(mean) - np.log1p(-mean)
    return np.ascontiguousarray(mean)
