import typing

import numpy as np

from staintk.errors import InvalidInputError


def _frozen(values: np.ndarray) -> np.ndarray:
    values = np.array(values, copy=True)
    values.setflags(write=False)
    return values


class RgbImage:
    """
    An 8-bit RGB image stored as a row-major `(height, width, 3)` array.

    >>> import numpy as np
    >>> img = RgbImage(np.zeros((2, 3, 3), dtype=np.uint8))
    >>> img.height, img.width, img.n_pixels
    (2, 3, 6)

    :param data: an array of shape `(height, width, 3)` with integer values in :math:`[0, 255]`.
    """

    def __init__(self, data: np.ndarray):
        data = np.asarray(data)
        if data.ndim != 3 or data.shape[2] != 3:
            raise InvalidInputError(f'RGB image must have shape (height, width, 3) but had {data.shape}')
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise InvalidInputError(f'RGB image must have at least one pixel but had shape {data.shape}')
        if data.dtype != np.uint8:
            if not np.issubdtype(data.dtype, np.integer):
                raise InvalidInputError(f'RGB image must have an integer dtype but had {data.dtype}')
            if data.min() < 0 or data.max() > 255:
                raise InvalidInputError('RGB image values must be in [0, 255]')
            data = data.astype(np.uint8)
        self._data = _frozen(data)

    @property
    def data(self) -> np.ndarray:
        """
        Get a read-only `uint8` array of shape `(height, width, 3)`.
        """
        return self._data

    @property
    def height(self) -> int:
        return self._data.shape[0]

    @property
    def width(self) -> int:
        return self._data.shape[1]

    @property
    def n_pixels(self) -> int:
        return self.height * self.width

    def pixels(self) -> np.ndarray:
        """
        Get the pixels as a `(3, n_pixels)` array, one column per pixel in row-major order.
        """
        return self._data.reshape(-1, 3).T

    def __eq__(self, other):
        return isinstance(other, RgbImage) and np.array_equal(self._data, other._data)

    def __hash__(self):
        return hash((self._data.shape, self._data.tobytes()))

    def __repr__(self):
        return f'RgbImage(height={self.height}, width={self.width})'


class OdImage:
    """
    Optical density of an image: an `m × n` matrix with one column per pixel (row-major pixel order).

    The values are non-negative and finite, in natural-log OD units.

    :param values: an array of shape `(m, n)`.
    :param height: the height of the source image, `1` by default.
    :param width: the width of the source image, `n` by default.
    """

    def __init__(self, values: np.ndarray,
                 height: typing.Optional[int] = None,
                 width: typing.Optional[int] = None):
        values = np.asarray(values, dtype=float)
        if values.ndim != 2:
            raise InvalidInputError(f'OD values must be a 2D (channels, pixels) array but had shape {values.shape}')
        m, n = values.shape
        if m < 1 or n < 1:
            raise InvalidInputError(f'OD image must have at least one channel and one pixel but had {values.shape}')
        if not np.all(np.isfinite(values)):
            raise InvalidInputError('OD values must be finite')
        if np.any(values < 0.):
            raise InvalidInputError('OD values must be non-negative')
        self._height, self._width = _resolve_dims(n, height, width)
        self._values = _frozen(values)

    @property
    def values(self) -> np.ndarray:
        """
        Get a read-only `(m, n)` array with the optical densities.
        """
        return self._values

    @property
    def m(self) -> int:
        return self._values.shape[0]

    @property
    def n(self) -> int:
        return self._values.shape[1]

    @property
    def height(self) -> int:
        return self._height

    @property
    def width(self) -> int:
        return self._width

    def as_image_array(self) -> np.ndarray:
        """
        Get the values reshaped to `(height, width, m)`.
        """
        return self._values.T.reshape(self._height, self._width, self.m)

    def __eq__(self, other):
        return isinstance(other, OdImage) \
            and self._height == other._height \
            and self._width == other._width \
            and np.array_equal(self._values, other._values)

    def __hash__(self):
        return hash((self._height, self._width, self._values.tobytes()))

    def __repr__(self):
        return f'OdImage(m={self.m}, n={self.n}, height={self.height}, width={self.width})'


class LabImage:
    """
    An image in CIELAB color space stored as a `(height, width, 3)` array of `L`, `a`, and `b` values.
    """

    def __init__(self, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        if values.ndim != 3 or values.shape[2] != 3:
            raise InvalidInputError(f'LAB image must have shape (height, width, 3) but had {values.shape}')
        if not np.all(np.isfinite(values)):
            raise InvalidInputError('LAB values must be finite')
        self._values = _frozen(values)

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def height(self) -> int:
        return self._values.shape[0]

    @property
    def width(self) -> int:
        return self._values.shape[1]

    @property
    def n_pixels(self) -> int:
        return self.height * self.width

    def __repr__(self):
        return f'LabImage(height={self.height}, width={self.width})'


class ChannelStats:
    """
    Population mean and standard deviation of each channel of an image.
    """

    def __init__(self, mean: typing.Sequence[float], std: typing.Sequence[float]):
        mean = np.asarray(mean, dtype=float)
        std = np.asarray(std, dtype=float)
        if mean.ndim != 1 or mean.shape != std.shape:
            raise InvalidInputError(f'mean and std must be 1D arrays of the same length '
                                    f'but had shapes {mean.shape} and {std.shape}')
        if np.any(std < 0.):
            raise InvalidInputError('std must be non-negative')
        self._mean = _frozen(mean)
        self._std = _frozen(std)

    @property
    def mean(self) -> np.ndarray:
        return self._mean

    @property
    def std(self) -> np.ndarray:
        return self._std

    def __eq__(self, other):
        return isinstance(other, ChannelStats) \
            and np.array_equal(self._mean, other._mean) \
            and np.array_equal(self._std, other._std)

    def __hash__(self):
        return hash((self._mean.tobytes(), self._std.tobytes()))

    def __repr__(self):
        return f'ChannelStats(mean={self._mean.tolist()}, std={self._std.tolist()})'


def _resolve_dims(n: int,
                  height: typing.Optional[int],
                  width: typing.Optional[int]) -> typing.Tuple[int, int]:
    if height is None and width is None:
        return 1, n
    elif height is None:
        height = n // width if width else 0
    elif width is None:
        width = n // height if height else 0

    if height < 1 or width < 1 or height * width != n:
        raise InvalidInputError(f'{n:,d} pixels do not fit into a {height}×{width} image')
    return height, width
