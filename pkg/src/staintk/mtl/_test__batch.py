import numpy as np
import pytest

from staintk.color import rgb_to_od
from staintk.errors import InvalidInputError
from staintk.metrics import tta_predict
from staintk.model import RgbImage, SegMask

from ._batch import pixel_features, make_pixel_batch, ToyModelPredictor
from ._model import ToyModelParams


def random_image(seed: int, height: int = 5, width: int = 7) -> RgbImage:
    rng = np.random.default_rng(seed)
    return RgbImage(rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8))


class TestPixelFeatures:

    def test_optical_density(self):
        img = random_image(1)

        features = pixel_features(img)

        assert features.shape == (35, 3)
        assert np.array_equal(features, rgb_to_od(img).as_image_array().reshape(-1, 3))

    def test_neighborhood_mean(self):
        img = random_image(2)
        od = rgb_to_od(img).as_image_array()

        features = pixel_features(img, neighborhood=True).reshape(5, 7, 6)

        assert np.allclose(features[2, 3, 3:], od[1:4, 2:5].mean(axis=(0, 1)))
        corner = np.array([od[0, 0], od[0, 0], od[0, 1],
                           od[0, 0], od[0, 0], od[0, 1],
                           od[1, 0], od[1, 0], od[1, 1]])
        assert np.allclose(features[0, 0, 3:], corner.mean(axis=0))


class TestMakePixelBatch:

    def test_labels_follow_the_mask(self):
        img = random_image(3, 2, 2)
        mask = SegMask(np.array([[1, 0], [0, 1]]))

        batch = make_pixel_batch(img, mask)

        assert batch.labels.tolist() == [1., 0., 0., 1.]
        assert np.array_equal(batch.od_target, batch.features)

    def test_without_mask(self):
        batch = make_pixel_batch(random_image(4, 2, 3))

        assert batch.labels.tolist() == [0.] * 6

    def test_mask_shape_mismatch(self):
        with pytest.raises(InvalidInputError):
            make_pixel_batch(random_image(5, 2, 2), SegMask.empty(3, 3))


class TestToyModelPredictor:

    def test_logit_map(self):
        img = random_image(6)
        params = ToyModelParams.random(3, 2, np.random.default_rng(7))

        logits = ToyModelPredictor(params)(img)

        assert logits.shape == (5, 7)

    def test_pixelwise_model_is_rotation_invariant(self):
        img = random_image(8)
        predictor = ToyModelPredictor(ToyModelParams.random(3, 2, np.random.default_rng(9)))

        assert np.allclose(tta_predict(predictor, img), predictor(img), rtol=0., atol=1e-12)

    def test_feature_count_must_match(self):
        with pytest.raises(InvalidInputError):
            ToyModelPredictor(ToyModelParams.zeros(3, 2), neighborhood=True)
