import numpy as np
import pytest

from ._rng import make_rng, derive_seed


class TestMakeRng:

    def test_same_key_gives_same_stream(self):
        a = make_rng(7, 1, 2).integers(0, 1_000_000, size=20)
        b = make_rng(7, 1, 2).integers(0, 1_000_000, size=20)

        assert a.tolist() == b.tolist()

    @pytest.mark.parametrize('key_a, key_b', [
        ((0,), (1,)),
        ((1, 0), (0, 1)),
        ((), (0,)),
    ])
    def test_distinct_keys_give_distinct_streams(self, key_a, key_b):
        a = make_rng(7, *key_a).random(10)
        b = make_rng(7, *key_b).random(10)

        assert not np.array_equal(a, b)

    def test_distinct_seeds_give_distinct_streams(self):
        assert make_rng(1).random() != make_rng(2).random()

    def test_uses_philox(self):
        assert isinstance(make_rng(0).bit_generator, np.random.Philox)

    @pytest.mark.parametrize('seed', [-1, 1.5, '42'])
    def test_invalid_seed(self, seed):
        with pytest.raises(ValueError):
            make_rng(seed)


class TestDeriveSeed:

    def test_is_a_64_bit_int(self):
        seed = derive_seed(42, 3, 0)

        assert isinstance(seed, int)
        assert 0 <= seed < 2 ** 64

    def test_is_stable(self):
        assert derive_seed(42, 3, 0) == derive_seed(42, 3, 0)
        assert derive_seed(42, 3, 0) != derive_seed(42, 3, 1)

    def test_seeds_a_generator(self):
        seed = derive_seed(5, 2)

        assert make_rng(seed).random() == make_rng(seed).random()
