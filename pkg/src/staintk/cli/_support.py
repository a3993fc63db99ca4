import concurrent.futures
import json
import os
import typing

from staintk.augment import PerturbConfig
from staintk.dataio import Manifest, ManifestRow, read_manifest
from staintk.errors import InvalidInputError
from staintk.stainsep import SeparationConfig
from staintk.util import open_text_io_handle_for_reading, open_text_io_handle_for_writing

T = typing.TypeVar('T')
R = typing.TypeVar('R')


def separation_config(args) -> SeparationConfig:
    return SeparationConfig(
        n_stains=args.stains,
        sparsity=args.sparsity,
        max_iters=args.max_iters,
        tol=args.tol,
        tissue_od_threshold=args.tissue_threshold,
        seed=args.seed,
    )


def perturb_config(args) -> PerturbConfig:
    return PerturbConfig(scale_sigma=args.scale_sigma, max_attempts=args.max_attempts)


def read_text(path: str) -> str:
    with open_text_io_handle_for_reading(path, encoding='utf-8') as fh:
        return fh.read()


def write_text(text: str, path: str):
    with open_text_io_handle_for_writing(path, encoding='utf-8') as fh:
        fh.write(text)


def write_json(data: typing.Mapping[str, typing.Any], path: str):
    write_text(json.dumps(data, sort_keys=True) + '\n', path)


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def load_manifest(path: str) -> Manifest:
    manifest = read_manifest(path)
    if len(manifest) == 0:
        raise InvalidInputError(f'Manifest {path} has no rows')
    return manifest


def image_rows(args) -> Manifest:
    """
    Get the input images either from `--manifest` or from the positional image paths.
    """
    if getattr(args, 'manifest', None):
        return load_manifest(args.manifest)
    images = getattr(args, 'images', None) or []
    if len(images) == 0:
        raise InvalidInputError('No input images, use a manifest or image paths')
    rows = []
    for path in images:
        stem = os.path.splitext(os.path.basename(path))[0]
        rows.append(ManifestRow(stem, path, scanner=''))
    return Manifest(rows)


def map_ordered(func: typing.Callable[[T], R], items: typing.Sequence[T], n_threads: int) -> typing.List[R]:
    """
    Apply `func` to all `items` on up to `n_threads` threads, keeping the order of the `items`.
    """
    if n_threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=n_threads) as executor:
        return list(executor.map(func, items))


def describe_error(e: BaseException) -> str:
    return f'{type(e).__name__}: {e}'


def check_not_overwriting(inputs: typing.Iterable[str], outputs: typing.Iterable[str]):
    sources = {os.path.abspath(path) for path in inputs if path}
    for path in outputs:
        if os.path.abspath(path) in sources:
            raise InvalidInputError(f'Output {path} would overwrite an input')
