import argparse
import logging
import sys
import datetime
import timeit
import typing
from collections import defaultdict

import numpy as np
import pandas as pd

import staintk
from staintk.constants import HEMATOXYLIN, EOSIN

staintk.util.setup_logging()
logger = logging.getLogger(__name__)

COLUMNS = ('group', 'method', 'payload', 'throughput')

# We'll bench the patches of these sizes:
PATCH_SIZES = (32, 64, 128, 256)


def bench_func_throughput(func: typing.Callable[[], typing.Any],
                          number: int) -> float:
    # `timeit` returns the time it takes to execute the main statement a number of times,
    # measured in seconds as a float.
    cum_exec_time = timeit.timeit(func, number=number)
    return number / cum_exec_time


def make_patch(size: int, seed: int) -> staintk.RgbImage:
    stains = staintk.StainMatrix.from_columns([HEMATOXYLIN, EOSIN])
    return staintk.stainsep.make_synthetic_patch(stains, size, size, np.random.default_rng(seed)).image


def bench_separation(number: int = 10) -> typing.Mapping[str, typing.Sequence]:
    cfg = staintk.SeparationConfig(n_stains=2)
    results = defaultdict(list)

    for size in PATCH_SIZES:
        img = make_patch(size, seed=size)
        target = staintk.fit_profile(make_patch(size, seed=size + 1), cfg)
        od = staintk.rgb_to_od(img)
        payload = f'{size}×{size}'
        logger.info('Timing %s', payload)

        benches = {
            'rgb_to_od': lambda: staintk.rgb_to_od(img),
            'estimate_stains': lambda: staintk.estimate_stains(od, cfg),
            'fit_profile': lambda: staintk.fit_profile(img, cfg),
            'normalize_spcn': lambda: staintk.normalize_spcn(img, target, cfg),
        }

        for method in benches:
            bench = benches[method]
            logger.info(f' - {method}')
            throughput = bench_func_throughput(bench, number)
            results['method'].append(method)
            results['payload'].append(payload)
            results['throughput'].append(throughput)

    return results


def bench_augmentation(number: int = 10) -> typing.Mapping[str, typing.Sequence]:
    cfg = staintk.SeparationConfig(n_stains=2)
    results = defaultdict(list)

    for size in PATCH_SIZES:
        img = make_patch(size, seed=size)
        prior = staintk.augment.fit_stat_prior([make_patch(size, seed=size + i) for i in range(5)])
        payload = f'{size}×{size}'
        logger.info('Timing %s', payload)

        randstainna = staintk.MixturePolicy(p_randstainna=1., p_stain_sep=0.)
        stain_sep = staintk.MixturePolicy(p_randstainna=0., p_stain_sep=1.)
        rng = staintk.util.make_rng(size)
        predictor = staintk.mtl.ToyModelPredictor(staintk.mtl.ToyModelParams.random(3, 2, rng))
        benches = {
            'randstainna': lambda: staintk.mixture_augment(img, None, randstainna, rng, prior, cfg),
            'stain_sep': lambda: staintk.mixture_augment(img, None, stain_sep, rng, prior, cfg),
            'tta_toy_model': lambda: staintk.tta_predict(predictor, img),
        }

        for method in benches:
            bench = benches[method]
            logger.info(f' - {method}')
            throughput = bench_func_throughput(bench, number)
            results['method'].append(method)
            results['payload'].append(payload)
            results['throughput'].append(throughput)

    return results


def bench(number: int, revision: str):
    logger.info(f'Iterating {number:,d} times')

    bench_groups = {
        'separation': bench_separation,
        'augmentation': bench_augmentation,
    }

    results = []
    for group in bench_groups:
        logger.info(f'Benching `{group}`')
        bench_func = bench_groups[group]
        data = bench_func(number=number)

        result = pd.DataFrame(data)
        result['group'] = group
        results.append(result)

    df = pd.concat(results)
    df['revision'] = revision
    df = df.set_index(['group', 'method', 'payload', 'revision']).sort_index()

    fpath_df = f'stain_separation-{number}-{revision}.csv.gz'
    logger.info('Storing results at `%s`', fpath_df)
    df.to_csv(fpath_df)


def main() -> int:
    """
    Benchmark stain separation, normalization, and augmentation.
    """
    parser = argparse.ArgumentParser(prog='stain_separation',
                                     formatter_class=argparse.RawTextHelpFormatter,
                                     description=main.__doc__)
    parser.add_argument('-n', '--number', type=int, default=10, help='Number of iterations of each bench')
    parser.add_argument('-r', '--revision', default=None, help='The benchmark revision')

    args = parser.parse_args(sys.argv[1:])
    if args.revision is None:
        revision = datetime.datetime.now().strftime('%Y-%m-%d-%H%M%S')
    else:
        revision = args.revision
    bench(args.number, revision)

    return 0


if __name__ == '__main__':
    sys.exit(main())
