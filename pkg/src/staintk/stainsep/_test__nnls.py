import numpy as np
import pytest
from scipy.optimize import nnls

from staintk.errors import InvalidInputError
from ._nnls import nonnegative_projection


class TestNonnegativeProjection:

    def test_identity_basis_clips_negative_coordinates(self):
        w = np.eye(3)
        x = np.array([[1.5, -2.], [-.5, .25], [3., 0.]])

        h = nonnegative_projection(w, x)

        assert h.tolist() == [[1.5, 0.], [0., .25], [3., 0.]]

    def test_points_in_the_cone_are_recovered(self):
        rng = np.random.default_rng(11)
        w = rng.uniform(.1, 1., size=(3, 2))
        expected = rng.uniform(0., 2., size=(2, 50))

        h = nonnegative_projection(w, w @ expected)

        assert np.allclose(h, expected, atol=1e-10)

    @pytest.mark.parametrize('r', [1, 2, 3])
    def test_matches_reference_nnls(self, r: int):
        rng = np.random.default_rng(r)
        w = rng.uniform(0., 1., size=(3, r))
        x = rng.normal(.5, 1., size=(3, 40))

        h = nonnegative_projection(w, x)

        for j in range(x.shape[1]):
            expected, _ = nnls(w, x[:, j])
            assert np.allclose(h[:, j], expected, atol=1e-9)

    @pytest.mark.parametrize('l1', [.05, .1, 1.])
    def test_l1_solution_satisfies_optimality_conditions(self, l1: float):
        rng = np.random.default_rng(5)
        w = rng.uniform(.1, 1., size=(3, 2))
        x = rng.uniform(0., 2., size=(3, 60))

        h = nonnegative_projection(w, x, l1)

        grad = 2. * w.T @ (w @ h - x) + l1
        assert np.all(h >= 0.)
        assert np.all(np.abs(grad[h > 0.]) < 1e-9)
        assert np.all(grad[h == 0.] > -1e-9)

    def test_zero_pixel(self):
        h = nonnegative_projection(np.eye(3)[:, :2], np.zeros((3, 1)), .1)

        assert np.all(h == 0.)

    def test_shape_mismatch(self):
        with pytest.raises(InvalidInputError):
            nonnegative_projection(np.eye(3), np.zeros((2, 4)))

    def test_negative_l1(self):
        with pytest.raises(InvalidInputError):
            nonnegative_projection(np.eye(3), np.zeros((3, 4)), -.1)
