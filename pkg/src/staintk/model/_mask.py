import numpy as np

from staintk.errors import InvalidInputError
from ._image import _frozen


class SegMask:
    """
    A binary segmentation mask of shape `(height, width)`.

    >>> import numpy as np
    >>> mask = SegMask(np.array([[0, 1], [1, 1]]))
    >>> mask.count()
    3

    :param values: an array of shape `(height, width)`, non-zero entries are positive.
    """

    def __init__(self, values: np.ndarray):
        values = np.asarray(values)
        if values.ndim != 2:
            raise InvalidInputError(f'Mask must be a 2D array but had shape {values.shape}')
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise InvalidInputError(f'Mask must have at least one pixel but had shape {values.shape}')
        self._values = _frozen(values.astype(bool))

    @staticmethod
    def empty(height: int, width: int) -> 'SegMask':
        return SegMask(np.zeros((height, width), dtype=bool))

    @property
    def values(self) -> np.ndarray:
        """
        Get a read-only `bool` array of shape `(height, width)`.
        """
        return self._values

    @property
    def height(self) -> int:
        return self._values.shape[0]

    @property
    def width(self) -> int:
        return self._values.shape[1]

    @property
    def shape(self):
        return self._values.shape

    def count(self) -> int:
        """
        Get the number of positive pixels.
        """
        return int(np.count_nonzero(self._values))

    def is_empty(self) -> bool:
        return self.count() == 0

    def __eq__(self, other):
        return isinstance(other, SegMask) and np.array_equal(self._values, other._values)

    def __hash__(self):
        return hash((self._values.shape, self._values.tobytes()))

    def __repr__(self):
        return f'SegMask(height={self.height}, width={self.width}, n_positive={self.count()})'
