import numpy as np
import pytest

from staintk.errors import InvalidInputError
from staintk.model import RgbImage, LabImage
from ._lab import rgb_to_lab, lab_to_rgb, channel_stats


def solid(r: int, g: int, b: int, height: int = 1, width: int = 1) -> RgbImage:
    data = np.empty((height, width, 3), dtype=np.uint8)
    data[...] = (r, g, b)
    return RgbImage(data)


class TestRgbToLab:

    def test_white_point(self):
        lab = rgb_to_lab(solid(255, 255, 255)).values[0, 0]

        assert lab[0] == pytest.approx(100., abs=1e-3)
        assert lab[1] == pytest.approx(0., abs=1e-2)
        assert lab[2] == pytest.approx(0., abs=1e-2)

    def test_black(self):
        lab = rgb_to_lab(solid(0, 0, 0)).values[0, 0]

        assert lab[0] == pytest.approx(0., abs=1e-9)
        assert lab[1] == pytest.approx(0., abs=1e-6)
        assert lab[2] == pytest.approx(0., abs=1e-6)

    def test_mid_gray(self):
        lab = rgb_to_lab(solid(119, 119, 119)).values[0, 0]

        assert 49. < lab[0] < 51.
        assert lab[1] == pytest.approx(0., abs=1e-2)
        assert lab[2] == pytest.approx(0., abs=1e-2)

    def test_round_trip_on_random_pixels(self):
        rng = np.random.default_rng(1234)
        data = rng.integers(0, 256, size=(1, 1000, 3), dtype=np.uint8)

        back = lab_to_rgb(rgb_to_lab(RgbImage(data)))

        assert np.abs(back.data.astype(int) - data.astype(int)).max() <= 2

    def test_out_of_gamut_is_clamped(self):
        lab = LabImage(np.array([[[50., 120., -120.]]]))

        rgb = lab_to_rgb(lab)

        assert rgb.data.dtype == np.uint8


class TestChannelStats:

    def test_constant_image_has_zero_std(self):
        stats = channel_stats(rgb_to_lab(solid(200, 120, 150, height=3, width=4)))

        assert np.all(stats.std == 0.)

    def test_gray_image_statistics_are_exact(self):
        lab = rgb_to_lab(RgbImage(np.full((5, 7, 3), 128, dtype=np.uint8)))

        stats = channel_stats(lab)

        assert stats.mean.tolist() == lab.values[0, 0].tolist()
        assert stats.std.tolist() == [0., 0., 0.]

    def test_two_point_population(self):
        lab = LabImage(np.array([[[0., 0., 0.], [100., 0., 0.]]]))

        stats = channel_stats(lab)

        assert stats.mean[0] == pytest.approx(50.)
        assert stats.std[0] == pytest.approx(50.)

    def test_matches_two_pass_oracle(self):
        rng = np.random.default_rng(17)
        data = rng.integers(0, 256, size=(12, 9, 3), dtype=np.uint8)
        lab = rgb_to_lab(RgbImage(data))

        stats = channel_stats(lab)

        pixels = lab.values.reshape(-1, 3)
        for c in range(3):
            column = [float(v) for v in pixels[:, c]]
            mean = sum(column) / len(column)
            var = sum((v - mean) ** 2 for v in column) / len(column)
            assert stats.mean[c] == pytest.approx(mean, rel=1e-9, abs=1e-9)
            assert stats.std[c] == pytest.approx(var ** .5, rel=1e-9, abs=1e-9)

    def test_empty_image_is_rejected(self):
        with pytest.raises(InvalidInputError):
            channel_stats(LabImage(np.zeros((0, 3, 3))))
