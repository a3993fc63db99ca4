import typing

import numpy as np

from staintk.errors import InvalidInputError
from ._image import _frozen, _resolve_dims

UNIT_NORM_TOLERANCE = 1e-9


class StainMatrix:
    """
    An `m × r` matrix whose columns are unit-length, non-negative optical-density color bases of `r` stains.

    Use :func:`StainMatrix.from_columns` to build the matrix from columns that are not normalized yet.

    >>> w = StainMatrix.from_columns([[3., 4., 0.]])
    >>> w.values[:, 0].tolist()
    [0.6, 0.8, 0.0]

    :param values: an array of shape `(m, r)`.
    """

    def __init__(self, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        if values.ndim != 2:
            raise InvalidInputError(f'Stain matrix must be a 2D (m, r) array but had shape {values.shape}')
        m, r = values.shape
        if m < 1 or r < 1:
            raise InvalidInputError(f'Stain matrix must have at least one channel and one stain but was {values.shape}')
        if not np.all(np.isfinite(values)):
            raise InvalidInputError('Stain matrix must contain only finite values')
        if np.any(values < 0.):
            raise InvalidInputError('Stain matrix must be non-negative')
        norms = np.linalg.norm(values, axis=0)
        if np.any(np.abs(norms - 1.) > UNIT_NORM_TOLERANCE):
            raise InvalidInputError(f'Stain matrix columns must have unit L2 norm but had {norms.tolist()}')
        self._values = _frozen(values)

    @staticmethod
    def from_columns(columns: typing.Iterable[typing.Sequence[float]]) -> 'StainMatrix':
        """
        Create the stain matrix from a sequence of (not necessarily normalized) stain vectors.

        :param columns: an iterable of `r` stain vectors, each with `m` non-negative values.
        :raises InvalidInputError: if a column is all zeros or negative.
        """
        values = np.array([np.asarray(c, dtype=float) for c in columns]).T
        if values.ndim != 2:
            raise InvalidInputError('Stain vectors must have the same length')
        return StainMatrix(normalize_columns(values))

    @property
    def values(self) -> np.ndarray:
        """
        Get a read-only `(m, r)` array.
        """
        return self._values

    @property
    def m(self) -> int:
        return self._values.shape[0]

    @property
    def r(self) -> int:
        return self._values.shape[1]

    def column(self, idx: int) -> np.ndarray:
        return self._values[:, idx]

    def permute(self, order: typing.Sequence[int]) -> 'StainMatrix':
        """
        Get a new stain matrix with columns in given `order`.
        """
        return StainMatrix(self._values[:, list(order)])

    def cosine_similarity(self, other: 'StainMatrix') -> np.ndarray:
        """
        Get an `r × r'` matrix with cosine similarities between the columns of this and the `other` matrix.
        """
        if self.m != other.m:
            raise InvalidInputError(f'Cannot compare stain matrices with {self.m} and {other.m} channels')
        return self._values.T @ other._values

    def __eq__(self, other):
        return isinstance(other, StainMatrix) and np.array_equal(self._values, other._values)

    def __hash__(self):
        return hash((self._values.shape, self._values.tobytes()))

    def __repr__(self):
        return f'StainMatrix(m={self.m}, r={self.r}, values={self._values.tolist()})'


class StainDensity:
    """
    An `r × n` matrix with non-negative concentrations of `r` stains in `n` pixels (row-major pixel order).

    :param values: an array of shape `(r, n)`.
    :param height: the height of the source image, `1` by default.
    :param width: the width of the source image, `n` by default.
    """

    def __init__(self, values: np.ndarray,
                 height: typing.Optional[int] = None,
                 width: typing.Optional[int] = None):
        values = np.asarray(values, dtype=float)
        if values.ndim != 2:
            raise InvalidInputError(f'Stain density must be a 2D (r, n) array but had shape {values.shape}')
        r, n = values.shape
        if r < 1 or n < 1:
            raise InvalidInputError(f'Stain density must have at least one stain and one pixel but was {values.shape}')
        if not np.all(np.isfinite(values)):
            raise InvalidInputError('Stain density must contain only finite values')
        if np.any(values < 0.):
            raise InvalidInputError('Stain density must be non-negative')
        self._height, self._width = _resolve_dims(n, height, width)
        self._values = _frozen(values)

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def r(self) -> int:
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

    def row_image(self, idx: int) -> np.ndarray:
        """
        Get the densities of the `idx`-th stain as a `(height, width)` array.
        """
        return self._values[idx].reshape(self._height, self._width)

    def permute(self, order: typing.Sequence[int]) -> 'StainDensity':
        return StainDensity(self._values[list(order)], self._height, self._width)

    def __eq__(self, other):
        return isinstance(other, StainDensity) \
            and self._height == other._height \
            and self._width == other._width \
            and np.array_equal(self._values, other._values)

    def __hash__(self):
        return hash((self._height, self._width, self._values.tobytes()))

    def __repr__(self):
        return f'StainDensity(r={self.r}, n={self.n}, height={self.height}, width={self.width})'


def normalize_columns(values: np.ndarray) -> np.ndarray:
    """
    Scale the columns of a non-negative matrix to unit L2 norm.

    :raises InvalidInputError: if a column has zero norm.
    """
    norms = np.linalg.norm(values, axis=0)
    if np.any(norms <= 0.):
        raise InvalidInputError('Cannot normalize a zero column')
    return values / norms
