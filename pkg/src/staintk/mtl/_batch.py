import typing

import numpy as np

from staintk.color import rgb_to_od
from staintk.errors import InvalidInputError
from staintk.model import RgbImage, SegMask
from staintk.util import validate_instance, validate_optional_instance

from ._model import ToyModelParams, PixelBatch, forward


def pixel_features(img: RgbImage, neighborhood: bool = False, i0: float = 255.) -> np.ndarray:
    """
    Get the `(n, d)` features of the pixels: the optical density (`d = 3`) and optionally
    the mean optical density of the 3×3 neighborhood (`d = 6`, edges are replicated).
    """
    img = validate_instance(img, RgbImage, 'img')
    od = rgb_to_od(img, i0).as_image_array()
    features = [od.reshape(-1, 3)]
    if neighborhood:
        padded = np.pad(od, ((1, 1), (1, 1), (0, 0)), mode='edge')
        total = np.zeros_like(od)
        for dy in range(3):
            for dx in range(3):
                total += padded[dy:dy + img.height, dx:dx + img.width]
        features.append((total / 9.).reshape(-1, 3))
    return np.concatenate(features, axis=1)


def make_pixel_batch(img: RgbImage,
                     mask: typing.Optional[SegMask] = None,
                     neighborhood: bool = False,
                     i0: float = 255.) -> PixelBatch:
    """
    Turn an image and its mask into a batch with one row per pixel (row-major).

    The reconstruction target is the optical density of the pixel. Pixels have label `0` if `mask` is `None`.

    >>> import numpy as np
    >>> from staintk.model import RgbImage
    >>> batch = make_pixel_batch(RgbImage(np.full((2, 2, 3), 128, dtype=np.uint8)), neighborhood=True)
    >>> batch.n, batch.d, batch.m
    (4, 6, 3)
    """
    img = validate_instance(img, RgbImage, 'img')
    mask = validate_optional_instance(mask, SegMask, 'mask')
    if mask is not None and mask.shape != (img.height, img.width):
        raise InvalidInputError(f'Mask shape {mask.shape} does not match the image {img.height}×{img.width}')
    features = pixel_features(img, neighborhood, i0)
    labels = np.zeros(img.n_pixels) if mask is None else mask.values.reshape(-1).astype(float)
    return PixelBatch(features, features[:, :3], labels)


class ToyModelPredictor:
    """
    Predict the logit map of an image with the toy model, e.g. for :func:`staintk.metrics.tta_predict`.

    :param params: the model parameters.
    :param neighborhood: `True` if the model was trained on the features with the neighborhood mean.
    :param i0: the reference intensity of the optical density.
    """

    def __init__(self, params: ToyModelParams, neighborhood: bool = False, i0: float = 255.):
        self._params = validate_instance(params, ToyModelParams, 'params')
        expected_d = 6 if neighborhood else 3
        if params.d != expected_d:
            raise InvalidInputError(f'Model with {params.d} features cannot use '
                                    f'{"neighborhood" if neighborhood else "pixel"} features ({expected_d})')
        self._neighborhood = neighborhood
        self._i0 = i0

    @property
    def params(self) -> ToyModelParams:
        return self._params

    def __call__(self, img: RgbImage) -> np.ndarray:
        batch = make_pixel_batch(img, None, self._neighborhood, self._i0)
        return forward(self._params, batch).logits.reshape(img.height, img.width)

    def __repr__(self):
        return f'ToyModelPredictor(params={self._params!r}, neighborhood={self._neighborhood})'
