import math

import numpy as np
import pytest

from staintk.errors import InvalidInputError
from staintk.model import RgbImage, OdImage
from ._od import rgb_to_od, od_to_rgb


def gray(value: int) -> RgbImage:
    return RgbImage(np.full((1, 1, 3), value, dtype=np.uint8))


class TestRgbToOd:

    @pytest.mark.parametrize('value, expected', [
        (255, 0.),
        (0, math.log(256.)),
        (93, -math.log(94. / 256.)),
    ])
    def test_known_values(self, value, expected):
        od = rgb_to_od(gray(value))

        assert od.values.shape == (3, 1)
        assert np.allclose(od.values, expected, rtol=0., atol=1e-12)

    def test_reference_intensity_is_exactly_zero(self):
        od = rgb_to_od(gray(200), i0=200)

        assert np.all(od.values == 0.)

    def test_known_values_rounded(self):
        assert rgb_to_od(gray(0)).values[0, 0] == pytest.approx(5.5452, abs=1e-4)
        assert rgb_to_od(gray(93)).values[0, 0] == pytest.approx(1.0019, abs=1e-4)

    def test_strictly_decreasing(self):
        data = np.repeat(np.arange(256, dtype=np.uint8), 3).reshape(1, 256, 3)

        od = rgb_to_od(RgbImage(data)).values[0]

        assert np.all(np.diff(od) < 0.)
        assert np.all(np.isfinite(od))
        assert np.all(od >= 0.)

    def test_keeps_dimensions(self):
        od = rgb_to_od(RgbImage(np.zeros((4, 5, 3), dtype=np.uint8)))

        assert (od.height, od.width, od.m, od.n) == (4, 5, 3, 20)

    @pytest.mark.parametrize('i0', [0, 256, -1])
    def test_invalid_reference_intensity(self, i0):
        with pytest.raises(InvalidInputError):
            rgb_to_od(gray(10), i0=i0)

    def test_empty_image_is_rejected(self):
        with pytest.raises(InvalidInputError):
            rgb_to_od(RgbImage(np.zeros((0, 4, 3), dtype=np.uint8)))


class TestOdToRgb:

    def test_zero_density_is_white(self):
        img = od_to_rgb(OdImage(np.zeros((3, 1))))

        assert img.data.tolist() == [[[255, 255, 255]]]

    def test_dense_is_black(self):
        img = od_to_rgb(OdImage(np.full((3, 1), 5.5452)))

        assert img.data.tolist() == [[[0, 0, 0]]]

    def test_very_dense_is_clamped(self):
        img = od_to_rgb(OdImage(np.full((3, 2), 50.)))

        assert np.all(img.data == 0)

    def test_round_trip_over_all_values(self):
        data = np.repeat(np.arange(256, dtype=np.uint8), 3).reshape(16, 16, 3)
        img = RgbImage(data)

        back = od_to_rgb(rgb_to_od(img))

        diff = np.abs(back.data.astype(int) - data.astype(int))
        assert diff.max() <= 1
        assert back.height == 16 and back.width == 16

    def test_round_trip_with_custom_reference(self):
        data = np.repeat(np.arange(241, dtype=np.uint8), 3).reshape(1, 241, 3)

        back = od_to_rgb(rgb_to_od(RgbImage(data), i0=240), i0=240)

        assert np.abs(back.data.astype(int) - data.astype(int)).max() <= 1
