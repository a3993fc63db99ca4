import numpy as np
import pytest
from PIL import Image

from staintk.errors import FormatError
from staintk.model import RgbImage, SegMask

from ._image import read_image, write_image, read_mask, write_mask


class TestImageIo:

    def test_round_trip(self, tmp_path):
        img = RgbImage(np.random.default_rng(1).integers(0, 256, size=(13, 17, 3), dtype=np.uint8))
        path = tmp_path / 'img.png'

        write_image(img, path)

        assert read_image(path) == img

    def test_gray_is_expanded(self, tmp_path):
        gray = np.random.default_rng(2).integers(0, 256, size=(4, 5), dtype=np.uint8)
        path = tmp_path / 'gray.png'
        Image.fromarray(gray).save(path)

        img = read_image(path)

        for channel in range(3):
            assert np.array_equal(img.data[..., channel], gray)

    def test_alpha_is_dropped(self, tmp_path):
        rgba = np.random.default_rng(3).integers(0, 256, size=(3, 3, 4), dtype=np.uint8)
        path = tmp_path / 'rgba.png'
        Image.fromarray(rgba).save(path)

        img = read_image(path)

        assert np.array_equal(img.data, rgba[..., :3])

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_image(tmp_path / 'missing.png')

    def test_not_an_image(self, tmp_path):
        path = tmp_path / 'text.png'
        path.write_text('definitely not a PNG')

        with pytest.raises(FormatError):
            read_image(path)

    def test_truncated_file(self, tmp_path):
        img = RgbImage(np.random.default_rng(4).integers(0, 256, size=(64, 64, 3), dtype=np.uint8))
        path = tmp_path / 'img.png'
        write_image(img, path)
        content = path.read_bytes()
        path.write_bytes(content[:len(content) // 2])

        with pytest.raises(FormatError):
            read_image(path)

    def test_sixteen_bit_is_unsupported(self, tmp_path):
        path = tmp_path / 'deep.png'
        Image.fromarray(np.full((4, 4), 40000, dtype=np.uint16)).save(path)

        with pytest.raises(FormatError):
            read_image(path)


class TestMaskIo:

    def test_full_mask(self, tmp_path):
        path = tmp_path / 'full.png'
        Image.fromarray(np.full((3, 4), 255, dtype=np.uint8)).save(path)

        mask = read_mask(path)

        assert mask.count() == 12

    def test_round_trip_is_exact(self, tmp_path):
        values = np.random.default_rng(5).random((9, 7)) < .5
        path = tmp_path / 'mask.png'

        write_mask(SegMask(values), path)

        assert np.array_equal(read_mask(path).values, values)
        assert set(np.unique(np.asarray(Image.open(path))).tolist()) <= {0, 255}

    def test_threshold(self, tmp_path):
        path = tmp_path / 'mid.png'
        Image.fromarray(np.array([[127, 128], [0, 255]], dtype=np.uint8)).save(path)

        mask = read_mask(path)

        assert mask.values.tolist() == [[False, True], [False, True]]

    def test_rgb_mask_with_equal_channels(self, tmp_path):
        path = tmp_path / 'rgb.png'
        gray = np.array([[0, 200], [255, 100]], dtype=np.uint8)
        Image.fromarray(np.stack([gray] * 3, axis=-1)).save(path)

        assert read_mask(path).values.tolist() == [[False, True], [True, False]]

    def test_rgb_mask_with_disagreeing_channels(self, tmp_path):
        path = tmp_path / 'color.png'
        rgb = np.zeros((2, 2, 3), dtype=np.uint8)
        rgb[0, 0, 1] = 255
        Image.fromarray(rgb).save(path)

        with pytest.raises(FormatError):
            read_mask(path)
