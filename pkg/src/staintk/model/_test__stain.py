import numpy as np
import pytest

from staintk.errors import InvalidInputError

from ._stain import StainMatrix, StainDensity, normalize_columns


class TestStainMatrix:

    def test_from_columns_normalizes(self):
        w = StainMatrix.from_columns([[3., 4., 0.], [0., 0., 2.]])

        assert w.m == 3
        assert w.r == 2
        assert np.allclose(np.linalg.norm(w.values, axis=0), 1.)
        assert w.column(1).tolist() == [0., 0., 1.]

    @pytest.mark.parametrize('columns', [
        [[0., 0., 0.]],
        [[1., -1., 0.]],
        [[1., np.nan, 0.]],
    ])
    def test_from_columns_rejects_invalid(self, columns):
        with pytest.raises(InvalidInputError):
            StainMatrix.from_columns(columns)

    def test_rejects_columns_that_are_not_unit(self):
        with pytest.raises(InvalidInputError):
            StainMatrix(np.array([[1.], [1.], [0.]]))

    def test_values_are_read_only(self):
        w = StainMatrix(np.eye(3)[:, :2])

        with pytest.raises(ValueError):
            w.values[0, 0] = .5

    def test_permute(self):
        w = StainMatrix(np.eye(3))

        permuted = w.permute([2, 0, 1])

        assert permuted.column(0).tolist() == [0., 0., 1.]
        assert permuted.permute([1, 2, 0]) == w

    def test_cosine_similarity(self):
        w = StainMatrix.from_columns([[1., 0., 0.], [1., 1., 0.]])

        sim = w.cosine_similarity(StainMatrix(np.eye(3)[:, :1]))

        assert sim.shape == (2, 1)
        assert sim[:, 0] == pytest.approx([1., np.sqrt(.5)])

    def test_cosine_similarity_needs_same_channels(self):
        with pytest.raises(InvalidInputError):
            StainMatrix(np.eye(3)).cosine_similarity(StainMatrix(np.eye(2)))

    def test_eq_and_hash(self):
        a = StainMatrix(np.eye(3)[:, :2])
        b = StainMatrix(np.eye(3)[:, :2])

        assert a == b
        assert hash(a) == hash(b)
        assert a != StainMatrix(np.eye(3)[:, 1:])


class TestStainDensity:

    def test_row_image(self):
        density = StainDensity(np.arange(12.).reshape(2, 6), height=2, width=3)

        assert density.row_image(1).tolist() == [[6., 7., 8.], [9., 10., 11.]]

    def test_default_dimensions(self):
        density = StainDensity(np.ones((1, 5)))

        assert (density.height, density.width) == (1, 5)

    @pytest.mark.parametrize('values', [
        np.array([[-1., 0.]]),
        np.array([[np.inf, 0.]]),
        np.ones(4),
    ])
    def test_invalid_values(self, values):
        with pytest.raises(InvalidInputError):
            StainDensity(values)

    def test_dimensions_must_fit(self):
        with pytest.raises(InvalidInputError):
            StainDensity(np.ones((2, 6)), height=4, width=2)

    def test_permute(self):
        density = StainDensity(np.array([[1., 2.], [3., 4.]]))

        assert density.permute([1, 0]).values.tolist() == [[3., 4.], [1., 2.]]


def test_normalize_columns_rejects_zero_column():
    with pytest.raises(InvalidInputError):
        normalize_columns(np.array([[1., 0.], [0., 0.]]))
