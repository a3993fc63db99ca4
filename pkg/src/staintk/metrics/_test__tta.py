import numpy as np
import pytest

from staintk.errors import InvalidInputError
from staintk.model import RgbImage

from ._tta import tta_predict, TtaSpace


@pytest.fixture
def gradient_image() -> RgbImage:
    y, x = np.mgrid[0:5, 0:7]
    data = np.stack([y * 40, x * 30, (x + y) * 10], axis=2).astype(np.uint8)
    return RgbImage(data)


def red_channel(img: RgbImage) -> np.ndarray:
    return img.data[:, :, 0].astype(float) / 10. - 5.


class TestTtaPredict:

    @pytest.mark.parametrize('space', list(TtaSpace))
    def test_constant_predictor(self, gradient_image, space):
        out = tta_predict(lambda img: np.full((img.height, img.width), -2.), gradient_image, space)

        assert np.allclose(out, -2., atol=1e-9)

    def test_equivariant_predictor_is_exact(self, gradient_image):
        out = tta_predict(red_channel, gradient_image)

        assert np.array_equal(out, red_channel(gradient_image))

    def test_corner_marker(self):
        img = RgbImage(np.zeros((3, 4, 3), dtype=np.uint8))

        def marker(x: RgbImage) -> np.ndarray:
            out = np.zeros((x.height, x.width))
            out[0, 0] = 8.
            return out

        out = tta_predict(marker, img)

        expected = np.zeros((3, 4))
        for y, x in ((0, 0), (0, 3), (2, 0), (2, 3)):
            expected[y, x] = 2.
        assert np.array_equal(out, expected)

    def test_rotation_invariance(self, gradient_image):
        def predictor(x: RgbImage) -> np.ndarray:
            # Not equivariant: depends on the absolute row.
            rows = np.arange(x.height, dtype=float)[:, None]
            return x.data[:, :, 1].astype(float) / 50. + rows

        rotated = RgbImage(np.rot90(gradient_image.data, 1))

        plain = tta_predict(predictor, gradient_image)
        back = np.rot90(tta_predict(predictor, rotated), -1)

        assert np.allclose(plain, back, atol=1e-12)

    def test_probability_space_keeps_sign(self, gradient_image):
        out = tta_predict(red_channel, gradient_image, TtaSpace.PROBABILITY)

        assert np.allclose(out, red_channel(gradient_image), atol=1e-9)

    def test_wrong_output_shape(self, gradient_image):
        with pytest.raises(InvalidInputError):
            tta_predict(lambda img: np.zeros((5, 7)), gradient_image)
