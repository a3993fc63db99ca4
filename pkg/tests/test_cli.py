import csv
import json
import os
import typing

import numpy as np
import pytest

import staintk
from staintk.augment import StatPrior
from staintk.cli import main, EXIT_OK, EXIT_IO, EXIT_INVALID
from staintk.dataio import FoldAssignment
from staintk.model import SegMask
from staintk.stainsep import StainProfile


def read_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def read_csv(path: str) -> typing.List[typing.Dict[str, str]]:
    with open(path) as fh:
        return list(csv.DictReader(fh))


def last_error(capsys) -> typing.Mapping[str, typing.Any]:
    lines = [line for line in capsys.readouterr().err.splitlines() if line.startswith('{')]
    return json.loads(lines[-1])


def tree_bytes(root: str) -> typing.Mapping[str, bytes]:
    contents = {}
    for dirpath, _, filenames in os.walk(root):
        for filename in filenames:
            path = os.path.join(dirpath, filename)
            with open(path, 'rb') as fh:
                contents[os.path.relpath(path, root)] = fh.read()
    return contents


def write_profile(stains, path: str) -> str:
    with open(path, 'w') as fh:
        fh.write(StainProfile(stains, [1.2, .8]).to_json())
    return path


class TestSeparate:

    def test_recovers_construction(self, dataset, out_dir, true_stains):
        dataset.add_patch('patch', seed=17, size=32)

        code = main(['separate', os.path.join(dataset.root, 'images', 'patch.png'), '-o', out_dir])

        assert code == EXIT_OK
        data = read_json(os.path.join(out_dir, 'stains.json'))
        profile = StainProfile.from_dict(data)
        assert np.all(np.max(profile.stains.cosine_similarity(true_stains), axis=0) >= .99)
        assert data['separation']['n_tissue'] > 0
        assert [entry['stain'] for entry in data['density']] == [0, 1]
        for i in range(2):
            density = staintk.read_mask(os.path.join(out_dir, f'density_{i}.png'))
            assert density.shape == (32, 32)

    def test_blank_image(self, dataset, out_dir, blank_image, capsys):
        dataset.add_image('blank', blank_image)

        code = main(['separate', os.path.join(dataset.root, 'images', 'blank.png'), '-o', out_dir])

        assert code == EXIT_INVALID
        error = last_error(capsys)
        assert error['error'] == 'InsufficientTissueError'
        assert error['exit_code'] == EXIT_INVALID

    def test_missing_file(self, tmp_path, out_dir, capsys):
        code = main(['separate', str(tmp_path / 'nope.png'), '-o', out_dir])

        assert code == EXIT_IO
        assert last_error(capsys)['exit_code'] == EXIT_IO


class TestNormalize:

    def test_own_profile_is_near_identity(self, dataset, out_dir):
        patch = dataset.add_patch('patch', seed=5)
        image_path = os.path.join(dataset.root, 'images', 'patch.png')
        profile_dir = os.path.join(out_dir, 'profile')
        assert main(['separate', image_path, '-o', profile_dir]) == EXIT_OK

        code = main(['normalize', image_path,
                     '--target', os.path.join(profile_dir, 'stains.json'),
                     '-o', os.path.join(out_dir, 'normalized')])

        assert code == EXIT_OK
        out = staintk.read_image(os.path.join(out_dir, 'normalized', 'patch.png'))
        diff = np.abs(out.data.astype(int) - patch.image.data.astype(int))
        assert diff.mean() <= 1.
        assert diff.max() <= 3

    def test_failures_are_recorded(self, dataset, out_dir, blank_image, true_stains):
        dataset.add_patch('a', seed=1)
        dataset.add_image('blank', blank_image)
        dataset.add_patch('b', seed=2)
        manifest = dataset.write_manifest()
        target = write_profile(true_stains, os.path.join(dataset.root, 'target.json'))

        code = main(['normalize', '--manifest', manifest, '--target', target, '-o', out_dir])

        assert code == EXIT_OK
        assert sorted(f for f in os.listdir(out_dir) if f.endswith('.png')) == ['a.png', 'b.png']
        summary = read_json(os.path.join(out_dir, 'normalize_summary.json'))
        assert summary['n_ok'] == 2
        assert summary['n_failed'] == 1
        assert [image['status'] for image in summary['images']] == ['ok', 'error', 'ok']

    def test_all_failing(self, dataset, out_dir, blank_image, true_stains):
        dataset.add_image('blank', blank_image)
        target = write_profile(true_stains, os.path.join(dataset.root, 'target.json'))

        code = main(['normalize', '--manifest', dataset.write_manifest(), '--target', target, '-o', out_dir])

        assert code == EXIT_INVALID

    def test_empty_manifest(self, dataset, out_dir, true_stains):
        target = write_profile(true_stains, os.path.join(dataset.root, 'target.json'))

        code = main(['normalize', '--manifest', dataset.write_manifest(), '--target', target, '-o', out_dir])

        assert code == EXIT_INVALID

    def test_does_not_overwrite_inputs(self, dataset, true_stains):
        dataset.add_patch('a', seed=1)
        target = write_profile(true_stains, os.path.join(dataset.root, 'target.json'))
        before = tree_bytes(dataset.root)

        code = main(['normalize', '--manifest', dataset.write_manifest(), '--target', target,
                     '-o', os.path.join(dataset.root, 'images')])

        assert code == EXIT_INVALID
        after = tree_bytes(dataset.root)
        assert {path: after[path] for path in before} == before


class TestAugment:

    @pytest.fixture
    def manifest(self, dataset) -> str:
        for i in range(4):
            dataset.add_patch(f'p{i}', scanner='AB'[i % 2], seed=i)
        return dataset.write_manifest()

    @pytest.fixture
    def prior(self, manifest, tmp_path) -> str:
        out = str(tmp_path / 'prior')
        assert main(['fit-prior', '--manifest', manifest, '-o', out]) == EXIT_OK
        return os.path.join(out, 'prior.json')

    def test_zero_policy_copies_inputs(self, dataset, manifest, out_dir):
        code = main(['augment', '--manifest', manifest, '--policy', '0', '0', '--n', '2', '-o', out_dir])

        assert code == EXIT_OK
        inputs = tree_bytes(dataset.root)
        for i in range(4):
            for v in range(2):
                with open(os.path.join(out_dir, 'images', f'p{i}_{v}.png'), 'rb') as fh:
                    assert fh.read() == inputs[os.path.join('images', f'p{i}.png')]
                with open(os.path.join(out_dir, 'masks', f'p{i}_{v}.png'), 'rb') as fh:
                    assert fh.read() == inputs[os.path.join('masks', f'p{i}.png')]

        provenance = read_csv(os.path.join(out_dir, 'provenance.csv'))
        assert len(provenance) == 8
        assert {row['branch'] for row in provenance} == {'identity'}
        assert provenance[0]['image_path'] == os.path.join('images', 'p0_0.png')

        augmented = staintk.read_manifest(os.path.join(out_dir, 'manifest.csv'))
        assert augmented.ids()[:2] == ('p0_0', 'p0_1')
        assert augmented.get_row('p1_0').scanner == 'B'

    def test_same_seed_gives_identical_trees(self, manifest, prior, tmp_path):
        trees = []
        for threads, name in ((1, 'first'), (4, 'second'), (1, 'third')):
            out = str(tmp_path / name)
            code = main(['augment', '--manifest', manifest, '--policy', '.4', '.4', '--prior', prior,
                         '--n', '3', '--seed', '11', '--threads', str(threads), '-o', out])
            assert code == EXIT_OK
            trees.append(tree_bytes(out))

        assert trees[0] == trees[1] == trees[2]

    def test_distinct_seeds_give_distinct_variants(self, manifest, prior, tmp_path):
        trees = []
        for seed in (1, 2):
            out = str(tmp_path / str(seed))
            assert main(['augment', '--manifest', manifest, '--policy', '1', '0', '--prior', prior,
                         '--seed', str(seed), '-o', out]) == EXIT_OK
            trees.append(tree_bytes(out))

        assert trees[0][os.path.join('images', 'p0_0.png')] != trees[1][os.path.join('images', 'p0_0.png')]

    def test_randstainna_needs_prior(self, manifest, out_dir, capsys):
        code = main(['augment', '--manifest', manifest, '--policy', '.5', '0', '-o', out_dir])

        assert code == EXIT_INVALID
        assert last_error(capsys)['error'] == 'InvalidInputError'


class TestFitPrior:

    def test_identical_corpus_has_zero_spread(self, dataset, out_dir):
        patch = dataset.add_patch('a', seed=3)
        dataset.add_image('b', patch.image)

        code = main(['fit-prior', '--manifest', dataset.write_manifest(), '-o', out_dir])

        assert code == EXIT_OK
        with open(os.path.join(out_dir, 'prior.json')) as fh:
            prior = StatPrior.from_json(fh.read())
        assert prior.n_images == 2
        assert np.allclose(prior.sigma_mean, 0., atol=1e-9)
        assert np.allclose(prior.sigma_std, 0., atol=1e-9)

    def test_matches_library(self, dataset, out_dir):
        patches = [dataset.add_patch(f'p{i}', seed=i) for i in range(3)]

        code = main(['fit-prior', '--manifest', dataset.write_manifest(), '-o', out_dir])

        assert code == EXIT_OK
        with open(os.path.join(out_dir, 'prior.json')) as fh:
            prior = StatPrior.from_json(fh.read())
        expected = staintk.augment.fit_stat_prior([patch.image for patch in patches])
        assert np.allclose(prior.mu_mean, expected.mu_mean, atol=1e-12)
        assert np.allclose(prior.sigma_std, expected.sigma_std, atol=1e-12)

    def test_empty(self, dataset, out_dir):
        assert main(['fit-prior', '--manifest', dataset.write_manifest(), '-o', out_dir]) == EXIT_INVALID


class TestEvaluate:

    @staticmethod
    def prefix_mask(n_positive: int, shape=(25, 40)) -> SegMask:
        values = np.zeros(shape[0] * shape[1], dtype=bool)
        values[:n_positive] = True
        return SegMask(values.reshape(shape))

    def test_perfect_predictions(self, dataset, out_dir, blank_image, capsys):
        for i, n in enumerate((10, 300, 999)):
            mask = self.prefix_mask(n)
            dataset.add_image(f'p{i}', blank_image, mask=mask, pred=mask)

        code = main(['evaluate', '--manifest', dataset.write_manifest(), '-o', out_dir])

        assert code == EXIT_OK
        assert capsys.readouterr().out.strip() == 'cosas=1.000 dice=1.000 iou=1.000'

    def test_known_scores(self, dataset, out_dir, blank_image, capsys):
        # Predictions inside a full ground truth, with IoU 0.926 and 0.684 (Dice 0.9616 and 0.8124).
        truth = self.prefix_mask(1000)
        dataset.add_image('a', blank_image, mask=truth, pred=self.prefix_mask(926), scanner='A')
        dataset.add_image('b', blank_image, mask=truth, pred=self.prefix_mask(684), scanner='B')

        code = main(['evaluate', '--manifest', dataset.write_manifest(), '-o', out_dir])

        assert code == EXIT_OK
        assert capsys.readouterr().out.strip() == 'cosas=0.846 dice=0.887 iou=0.805'
        report = read_json(os.path.join(out_dir, 'metrics.json'))
        assert report['overall']['mean']['iou'] == pytest.approx(.805, abs=1e-12)
        assert sorted(report['groups']['scanner']) == ['A', 'B']

    def test_mismatched_pair_is_an_error_row(self, dataset, out_dir, blank_image):
        mask = self.prefix_mask(100)
        dataset.add_image('ok', blank_image, mask=mask, pred=mask)
        dataset.add_image('bad', blank_image, mask=mask, pred=self.prefix_mask(100, shape=(10, 10)))

        code = main(['evaluate', '--manifest', dataset.write_manifest(), '-o', out_dir])

        assert code == EXIT_OK
        rows = {row['id']: row for row in read_csv(os.path.join(out_dir, 'metrics.csv'))}
        assert rows['ok']['cosas'] != ''
        assert rows['ok']['error'] == ''
        assert rows['bad']['cosas'] == ''
        assert rows['bad']['error'] != ''
        assert read_json(os.path.join(out_dir, 'metrics.json'))['overall']['n_images'] == 1

    def test_all_unreadable(self, dataset, out_dir, blank_image):
        dataset.add_image('a', blank_image, mask=self.prefix_mask(5))

        assert main(['evaluate', '--manifest', dataset.write_manifest(), '-o', out_dir]) == EXIT_INVALID

    def test_toy_model_with_tta(self, dataset, tmp_path, out_dir):
        for i in range(2):
            dataset.add_patch(f'p{i}', seed=i)
        manifest = dataset.write_manifest()
        model_dir = str(tmp_path / 'model')
        assert main(['train-toy', '--manifest', manifest, '--steps', '20', '-o', model_dir]) == EXIT_OK

        code = main(['evaluate', '--manifest', manifest, '--model', os.path.join(model_dir, 'params.json'),
                     '--tta', 'on', '-o', out_dir])

        assert code == EXIT_OK
        assert read_json(os.path.join(out_dir, 'metrics.json'))['overall']['n_images'] == 2

    def test_tta_needs_model(self, dataset, out_dir, blank_image):
        mask = self.prefix_mask(100)
        dataset.add_image('a', blank_image, mask=mask, pred=mask)

        code = main(['evaluate', '--manifest', dataset.write_manifest(), '--tta', 'on', '-o', out_dir])

        assert code == EXIT_INVALID


class TestTrainToy:

    @pytest.fixture
    def manifest(self, dataset) -> str:
        dataset.add_patch('p', seed=4)
        return dataset.write_manifest()

    def test_zero_learning_rate_gives_flat_trace(self, manifest, out_dir):
        code = main(['train-toy', '--manifest', manifest, '--lr', '0', '--steps', '5', '-o', out_dir])

        assert code == EXIT_OK
        rows = read_csv(os.path.join(out_dir, 'trace.csv'))
        assert [row['step'] for row in rows] == ['0', '1', '2', '3', '4']
        assert len({row['total'] for row in rows}) == 1

    def test_zero_alpha_total_is_segmentation_loss(self, manifest, out_dir):
        code = main(['train-toy', '--manifest', manifest, '--alpha', '0', '--steps', '10', '-o', out_dir])

        assert code == EXIT_OK
        for row in read_csv(os.path.join(out_dir, 'trace.csv')):
            assert float(row['total']) == float(row['seg'])

    def test_total_combines_both_losses(self, manifest, out_dir):
        code = main(['train-toy', '--manifest', manifest, '--steps', '10', '-o', out_dir])

        assert code == EXIT_OK
        for row in read_csv(os.path.join(out_dir, 'trace.csv')):
            expected = .3 * float(row['recon']) + float(row['seg'])
            assert float(row['total']) == pytest.approx(expected, abs=1e-12)

    def test_is_deterministic(self, manifest, tmp_path):
        trees = []
        for threads, name in ((1, 'a'), (3, 'b')):
            out = str(tmp_path / name)
            assert main(['train-toy', '--manifest', manifest, '--steps', '5', '--neighborhood',
                         '--threads', str(threads), '-o', out]) == EXIT_OK
            trees.append(tree_bytes(out))

        assert trees[0] == trees[1]

    def test_alpha_grid(self, manifest, out_dir):
        code = main(['train-toy', '--manifest', manifest, '--steps', '5', '--alpha-grid', '0', '.3', '1',
                     '-o', out_dir])

        assert code == EXIT_OK
        grid = read_json(os.path.join(out_dir, 'alpha_grid.json'))
        assert grid['best_alpha'] in (0., .3, 1.)
        assert os.path.isfile(os.path.join(out_dir, 'params.json'))


class TestGradcheck:

    def test_default_seed(self, capsys):
        code = main(['gradcheck'])

        assert code == EXIT_OK
        printed = capsys.readouterr().out.strip()
        assert printed.startswith('max_rel_error=')
        assert float(printed.split('=')[1]) < 1e-5

    @pytest.mark.parametrize('alpha', ['0', '.3', '1'])
    def test_alphas(self, alpha: str):
        assert main(['gradcheck', '--alpha', alpha, '--seed', '7']) == EXIT_OK


class TestSplitFolds:

    @pytest.fixture
    def manifest(self, tmp_path) -> str:
        path = tmp_path / 'manifest.csv'
        lines = ['id,image_path,scanner']
        lines += [f'{scanner}{i},{scanner}{i}.png,{scanner}' for scanner in 'AB' for i in range(4)]
        path.write_text('\n'.join(lines) + '\n')
        return str(path)

    def test_two_scanners_four_folds(self, manifest, out_dir):
        code = main(['split-folds', '--manifest', manifest, '--k', '4', '-o', out_dir])

        assert code == EXIT_OK
        with open(os.path.join(out_dir, 'folds.json')) as fh:
            folds = FoldAssignment.from_json(fh.read())
        assert folds.fold_sizes() == (2, 2, 2, 2)
        for scanner in 'AB':
            assert sorted(folds.fold_of(f'{scanner}{i}') for i in range(4)) == [0, 1, 2, 3]

    def test_is_deterministic(self, manifest, tmp_path):
        texts = []
        for name in ('a', 'b'):
            out = str(tmp_path / name)
            assert main(['split-folds', '--manifest', manifest, '--seed', '3', '-o', out]) == EXIT_OK
            with open(os.path.join(out, 'folds.json')) as fh:
                texts.append(fh.read())

        assert texts[0] == texts[1]

    def test_single_fold(self, manifest, out_dir, capsys):
        code = main(['split-folds', '--manifest', manifest, '--k', '1', '-o', out_dir])

        assert code == EXIT_INVALID
        assert last_error(capsys)['exit_code'] == EXIT_INVALID

    def test_duplicate_id_reports_line(self, tmp_path, out_dir, capsys):
        path = tmp_path / 'manifest.csv'
        path.write_text('id,image_path,scanner\na,a.png,A\nb,b.png,A\na,c.png,B\n')

        code = main(['split-folds', '--manifest', str(path), '--k', '2', '-o', out_dir])

        assert code == EXIT_INVALID
        error = last_error(capsys)
        assert error['error'] == 'DuplicateIdError'
        assert error['line_number'] == 4


class TestThreadCount:

    @pytest.fixture
    def manifest(self, dataset, true_stains) -> str:
        for i in range(6):
            patch = staintk.stainsep.make_synthetic_patch(true_stains, 24, 24, np.random.default_rng(i))
            mask = SegMask(patch.density.row_image(0) > .6)
            pred = SegMask(patch.density.row_image(0) > .5)
            dataset.add_image(f'p{i}', patch.image, mask, scanner='AB'[i % 2], pred=pred)
        return dataset.write_manifest()

    @pytest.mark.parametrize('command', ['separate', 'normalize', 'evaluate', 'fit-prior', 'split-folds'])
    def test_outputs_do_not_depend_on_threads(self, command: str, manifest, dataset, true_stains, out_dir):
        target = write_profile(true_stains, os.path.join(dataset.root, 'target.json'))
        args = {
            'separate': ['separate', os.path.join(dataset.root, 'images', 'p0.png')],
            'normalize': ['normalize', '--manifest', manifest, '--target', target],
            'evaluate': ['evaluate', '--manifest', manifest],
            'fit-prior': ['fit-prior', '--manifest', manifest],
            'split-folds': ['split-folds', '--manifest', manifest, '--k', '3'],
        }[command]

        trees = []
        for threads in (1, 4, 2):
            assert main(args + ['--seed', '5', '--threads', str(threads), '-o', out_dir]) == EXIT_OK
            trees.append(tree_bytes(out_dir))

        assert trees[0]
        assert trees[0] == trees[1] == trees[2]
