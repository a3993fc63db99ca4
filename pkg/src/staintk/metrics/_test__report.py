import csv
import io

import numpy as np
import pytest

from staintk.errors import InvalidInputError
from staintk.model import SegMask

from ._report import EvaluationPair, evaluate_dataset


def random_pair(seed: int, groups=None) -> EvaluationPair:
    rng = np.random.default_rng(seed)
    pred = SegMask(rng.random((8, 8)) < .4)
    gt = SegMask(rng.random((8, 8)) < .4)
    return EvaluationPair(f'img{seed}', pred, gt, groups)


class TestEvaluateDataset:

    def test_single_identical_pair(self):
        m = SegMask(np.eye(4))

        report = evaluate_dataset([EvaluationPair('a', m, m)])

        assert report.overall.mean == {'dice': 1., 'iou': 1., 'cosas': 1.}
        assert report.overall.std == {'dice': 0., 'iou': 0., 'cosas': 0.}

    def test_perfect_and_disjoint(self):
        a = SegMask(np.array([[1, 0]]))
        b = SegMask(np.array([[0, 1]]))

        report = evaluate_dataset([EvaluationPair('same', a, a), EvaluationPair('disjoint', a, b)])

        assert report.overall.mean['dice'] == .5
        assert report.overall.std['dice'] == .5

    @pytest.mark.parametrize('n_threads', [1, 4])
    def test_aggregates_match_rows(self, n_threads: int):
        pairs = [random_pair(seed) for seed in range(10)]

        report = evaluate_dataset(pairs, n_threads=n_threads)

        assert [row.identifier for row in report.rows] == [p.identifier for p in pairs]
        for metric in ('dice', 'iou', 'cosas'):
            values = [row.score(metric) for row in report.rows]
            mean = sum(values) / len(values)
            std = (sum((v - mean) ** 2 for v in values) / len(values)) ** .5
            assert report.overall.mean[metric] == pytest.approx(mean, abs=1e-12)
            assert report.overall.std[metric] == pytest.approx(std, abs=1e-12)

    def test_dimension_mismatch_is_an_error_row(self):
        good = random_pair(1)
        bad = EvaluationPair('bad', SegMask.empty(2, 2), SegMask.empty(3, 3))

        report = evaluate_dataset([good, bad])

        assert not report.rows[1].is_valid
        assert report.rows[1].dice is None
        assert report.overall.n_images == 1
        assert report.overall.mean['dice'] == report.rows[0].dice

    def test_groups(self):
        pairs = [random_pair(seed, {'scanner': 'A' if seed % 2 else 'B', 'fold': str(seed % 3)}) for seed in range(9)]

        report = evaluate_dataset(pairs)

        assert report.group_keys() == ('fold', 'scanner')
        scanner_a = [row.cosas for row in report.rows if row.groups['scanner'] == 'A']
        assert report.groups['scanner']['A'].n_images == len(scanner_a)
        assert report.groups['scanner']['A'].mean['cosas'] == pytest.approx(np.mean(scanner_a), abs=1e-12)

    def test_both_empty_flag(self):
        empty = SegMask.empty(2, 2)

        report = evaluate_dataset([EvaluationPair('e', empty, empty)])

        assert report.rows[0].both_empty
        assert report.rows[0].dice == 1.

    def test_empty_dataset(self):
        with pytest.raises(InvalidInputError):
            evaluate_dataset([])


class TestMetricsReport:

    def test_csv(self):
        pairs = [random_pair(seed, {'scanner': 'A'}) for seed in range(3)]
        report = evaluate_dataset(pairs)
        buf = io.StringIO()

        report.to_csv(buf)

        rows = list(csv.reader(io.StringIO(buf.getvalue())))
        assert rows[0] == ['id', 'dice', 'iou', 'cosas', 'both_empty', 'scanner', 'error']
        assert [r[0] for r in rows[1:]] == ['img0', 'img1', 'img2', '__mean__', '__std__']
        assert float(rows[4][1]) == report.overall.mean['dice']
        assert float(rows[5][3]) == report.overall.std['cosas']
        assert all(len(r) == len(rows[0]) for r in rows)

    def test_json_is_sorted_and_stable(self):
        report = evaluate_dataset([random_pair(1), random_pair(2)])

        text = report.to_json()

        assert text.endswith('\n')
        assert text == evaluate_dataset([random_pair(1), random_pair(2)]).to_json()
