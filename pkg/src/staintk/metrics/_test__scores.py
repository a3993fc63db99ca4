import numpy as np
import pytest

from staintk.errors import InvalidInputError
from staintk.model import SegMask

from ._scores import dice, iou, cosas_score, threshold_logits


def mask(*rows) -> SegMask:
    return SegMask(np.array(rows))


def random_masks(seed: int, shape=(6, 7)):
    rng = np.random.default_rng(seed)
    return SegMask(rng.random(shape) < rng.random()), SegMask(rng.random(shape) < rng.random())


class TestDiceAndIou:

    def test_identical(self):
        m = mask([1, 0], [1, 1])

        assert dice(m, m) == 1.
        assert iou(m, m) == 1.

    def test_disjoint(self):
        a = mask([1, 0], [0, 0])
        b = mask([0, 0], [0, 1])

        assert dice(a, b) == 0.
        assert iou(a, b) == 0.

    def test_partial_overlap(self):
        a = mask([1, 1, 0, 0])
        b = mask([0, 1, 1, 0])

        assert dice(a, b) == .5
        assert iou(a, b) == pytest.approx(1. / 3., abs=1e-15)

    def test_both_empty(self):
        empty = SegMask.empty(3, 3)

        assert dice(empty, empty) == 1.
        assert iou(empty, empty) == 1.

    def test_one_empty(self):
        assert dice(SegMask.empty(1, 2), mask([1, 0])) == 0.
        assert iou(mask([1, 0]), SegMask.empty(1, 2)) == 0.

    @pytest.mark.parametrize('seed', range(30))
    def test_properties(self, seed: int):
        a, b = random_masks(seed)

        d, i = dice(a, b), iou(a, b)

        assert d == dice(b, a)
        assert i == iou(b, a)
        assert 0. <= i <= d <= 1.
        assert d == pytest.approx(2. * i / (1. + i), abs=1e-12)
        assert min(d, i) <= cosas_score(d, i) <= max(d, i)

    @pytest.mark.parametrize('seed', range(10))
    def test_matches_set_counting(self, seed: int):
        a, b = random_masks(seed)
        sa = {(y, x) for y, x in zip(*np.nonzero(a.values))}
        sb = {(y, x) for y, x in zip(*np.nonzero(b.values))}
        if not sa and not sb:
            pytest.skip('Both masks are empty')

        assert dice(a, b) == pytest.approx(2. * len(sa & sb) / (len(sa) + len(sb)), abs=1e-15)
        assert iou(a, b) == pytest.approx(len(sa & sb) / len(sa | sb), abs=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            dice(SegMask.empty(2, 3), SegMask.empty(3, 2))
        with pytest.raises(InvalidInputError):
            iou(SegMask.empty(2, 3), SegMask.empty(2, 4))


class TestCosasScore:

    @pytest.mark.parametrize('d, i, expected', [
        (.887, .805, .846),
        (1., 1., 1.),
        (.5, .25, .375),
    ])
    def test_mean(self, d, i, expected):
        assert cosas_score(d, i) == pytest.approx(expected, abs=1e-12)

    def test_three_decimals(self):
        score = cosas_score(.887, .805)

        assert f'{score:.3f}' == '0.846'
        assert score == pytest.approx(.846, abs=1e-15)

    def test_out_of_range(self):
        with pytest.raises(InvalidInputError):
            cosas_score(1.2, .5)


class TestThresholdLogits:

    def test_negative_logits(self):
        assert threshold_logits(np.full((2, 3), -1.)).is_empty()

    def test_positive_logits(self):
        assert threshold_logits(np.ones((2, 3))).count() == 6

    def test_matches_comparison(self):
        logits = np.random.default_rng(1).normal(size=(5, 4))

        out = threshold_logits(logits, tau=.3)

        for y in range(5):
            for x in range(4):
                assert out.values[y, x] == (logits[y, x] > .3)

    def test_zero_logit_is_negative(self):
        assert threshold_logits(np.zeros((1, 1))).is_empty()

    def test_non_finite(self):
        with pytest.raises(InvalidInputError):
            threshold_logits(np.array([[np.nan]]))
