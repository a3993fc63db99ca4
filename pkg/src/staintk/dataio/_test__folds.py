import collections

import numpy as np
import pytest

from staintk.errors import InvalidInputError, ParseError

from ._folds import FoldAssignment, stratified_kfold
from ._manifest import Manifest, ManifestRow


def make_manifest(scanners) -> Manifest:
    return Manifest(ManifestRow(f'img{i:03d}', f'img{i:03d}.png', scanner) for i, scanner in enumerate(scanners))


class TestStratifiedKfold:

    def test_two_scanners_four_folds(self):
        manifest = make_manifest(['A'] * 4 + ['B'] * 4)

        folds = stratified_kfold(manifest, k=4, seed=42)

        counts = collections.Counter((row.scanner, folds.fold_of(row.identifier)) for row in manifest)
        assert counts == {(scanner, fold): 1 for scanner in 'AB' for fold in range(4)}

    def test_single_stratum(self):
        folds = stratified_kfold(make_manifest(['A'] * 10), k=4, seed=1)

        assert sorted(folds.fold_sizes()) == [2, 2, 3, 3]

    @pytest.mark.parametrize('seed', range(100))
    def test_balance_on_random_manifests(self, seed: int):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(4, 60))
        scanners = rng.choice(['A', 'B', 'C'], size=n).tolist()
        k = int(rng.integers(2, min(n, 6) + 1))
        manifest = make_manifest(scanners)

        folds = stratified_kfold(manifest, k=k, seed=seed)

        assert set(folds.assignments) == set(manifest.ids())
        for scanner in set(scanners):
            size = scanners.count(scanner)
            for fold in range(k):
                count = sum(1 for row in manifest
                            if row.scanner == scanner and folds.fold_of(row.identifier) == fold)
                assert abs(count - size / k) < 1
        sizes = folds.fold_sizes()
        assert max(sizes) - min(sizes) <= 1

    def test_is_deterministic(self):
        manifest = make_manifest(['A', 'B', 'C'] * 7)

        assert stratified_kfold(manifest, k=3, seed=5) == stratified_kfold(manifest, k=3, seed=5)
        assert stratified_kfold(manifest, k=3, seed=5) != stratified_kfold(manifest, k=3, seed=6)

    def test_by_another_column(self):
        manifest = Manifest(ManifestRow(f'i{i}', f'i{i}.png', 's', labels={'organ': 'kidney' if i < 4 else 'skin'})
                            for i in range(8))

        folds = stratified_kfold(manifest, k=2, seed=3, by='organ')

        kidney = [folds.fold_of(f'i{i}') for i in range(4)]
        assert sorted(kidney) == [0, 0, 1, 1]

    @pytest.mark.parametrize('k', [1, 0, 9])
    def test_bad_k(self, k: int):
        with pytest.raises(InvalidInputError):
            stratified_kfold(make_manifest(['A'] * 8), k=k)


class TestFoldAssignment:

    def test_json(self):
        folds = FoldAssignment(3, {'b': 2, 'a': 0, 'c': 1})

        text = folds.to_json()

        assert text == '{"assignments": {"a": 0, "b": 2, "c": 1}, "k": 3}\n'
        assert FoldAssignment.from_json(text) == folds

    def test_fold_out_of_range(self):
        with pytest.raises(InvalidInputError):
            FoldAssignment(2, {'a': 2})

    def test_malformed_json(self):
        with pytest.raises(ParseError):
            FoldAssignment.from_json('{"k": 2}')
