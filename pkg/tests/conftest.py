import os
import typing

import numpy as np
import pytest

import staintk
from staintk.model import StainMatrix, SegMask, RgbImage
from staintk.stainsep import make_synthetic_patch


# ####################################### Pytest options ############################################################# #

def pytest_addoption(parser):
    parser.addoption(
        "--runslow", action="store_true", default=False, help="run slow tests"
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: mark test that take several seconds to run")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        # --runslow given in cli: do not skip slow tests
        return
    skip_slow = pytest.mark.skip(reason="need --runslow option to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


# ####################################### Fixtures ################################################################### #

# A well-separated stain pair, close to but not equal to the reference H&E.
TRUE_STAINS = StainMatrix.from_columns([
    [.60, .74, .32],
    [.10, .97, .18],
])


@pytest.fixture(scope='session')
def true_stains() -> StainMatrix:
    return TRUE_STAINS


class DatasetWriter:
    """
    Writes synthetic H&E patches, their nuclei masks, and a manifest into a folder.
    """

    def __init__(self, root: str):
        self._root = root
        self._rows = []

    @property
    def root(self) -> str:
        return self._root

    def add_patch(self, identifier: str,
                  scanner: str = 'A',
                  seed: int = 0,
                  size: int = 24) -> staintk.stainsep.SyntheticPatch:
        patch = make_synthetic_patch(TRUE_STAINS, size, size, np.random.default_rng(seed))
        mask = SegMask(patch.density.row_image(0) > .6)
        self.add_image(identifier, patch.image, mask, scanner)
        return patch

    def add_image(self, identifier: str,
                  image: RgbImage,
                  mask: typing.Optional[SegMask] = None,
                  scanner: str = 'A',
                  pred: typing.Optional[SegMask] = None):
        image_path = os.path.join(self._root, 'images', f'{identifier}.png')
        os.makedirs(os.path.dirname(image_path), exist_ok=True)
        staintk.write_image(image, image_path)

        mask_path = ''
        if mask is not None:
            mask_path = os.path.join('masks', f'{identifier}.png')
            os.makedirs(os.path.join(self._root, 'masks'), exist_ok=True)
            staintk.write_mask(mask, os.path.join(self._root, mask_path))
        pred_path = ''
        if pred is not None:
            pred_path = os.path.join('preds', f'{identifier}.png')
            os.makedirs(os.path.join(self._root, 'preds'), exist_ok=True)
            staintk.write_mask(pred, os.path.join(self._root, pred_path))

        self._rows.append((identifier, os.path.join('images', f'{identifier}.png'), scanner, mask_path, pred_path))

    def write_manifest(self, name: str = 'manifest.csv') -> str:
        path = os.path.join(self._root, name)
        with open(path, 'w') as fh:
            fh.write('id,image_path,scanner,mask_path,pred_path\n')
            for row in self._rows:
                fh.write(','.join(row) + '\n')
        return path


@pytest.fixture
def dataset(tmp_path) -> DatasetWriter:
    root = tmp_path / 'dataset'
    root.mkdir()
    return DatasetWriter(str(root))


@pytest.fixture
def blank_image() -> RgbImage:
    return RgbImage(np.full((24, 24, 3), 255, dtype=np.uint8))


@pytest.fixture
def out_dir(tmp_path) -> str:
    return str(tmp_path / 'out')
