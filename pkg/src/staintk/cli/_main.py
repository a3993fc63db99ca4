import argparse
import json
import logging
import os
import sys
import typing

import staintk
from staintk.errors import FormatError, NonFiniteLossError, ParseError
from staintk.util import LOG_LEVELS, parse_log_level, setup_logging

from ._commands import cmd_separate, cmd_normalize, cmd_augment, cmd_fit_prior, cmd_evaluate
from ._commands import cmd_train_toy, cmd_gradcheck, cmd_split_folds
from ._commands import EXIT_IO, EXIT_INVALID, EXIT_NUMERIC

logger = logging.getLogger(__name__)


def _global_options() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group('global options')
    group.add_argument('--seed', type=int, default=42,
                       help='the root seed, all randomness of the command derives from it (default: %(default)s)')
    group.add_argument('--threads', type=int, default=os.cpu_count() or 1,
                       help='number of worker threads, does not change the results (default: %(default)s)')
    group.add_argument('-o', '--output', default='.',
                       help='output directory (default: the working directory)')
    group.add_argument('--log-level', default='WARNING', choices=LOG_LEVELS, type=str.upper,
                       help='verbosity of the log messages written to stderr (default: %(default)s)')
    return parser


def _separation_options() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group('stain separation')
    group.add_argument('--stains', type=int, default=2, help='number of stains (default: %(default)s)')
    group.add_argument('--sparsity', type=float, default=.1,
                       help='weight of the L1 penalty on the densities (default: %(default)s)')
    group.add_argument('--max-iters', type=int, default=200,
                       help='maximum number of factorization iterations (default: %(default)s)')
    group.add_argument('--tol', type=float, default=1e-6,
                       help='relative objective decrease to stop at (default: %(default)s)')
    group.add_argument('--tissue-threshold', type=float, default=.15,
                       help='OD norm above which a pixel is tissue (default: %(default)s)')
    return parser


def _add_inputs(parser: argparse.ArgumentParser):
    parser.add_argument('images', nargs='*', help='image paths, used if no manifest is given')
    parser.add_argument('--manifest', help='CSV manifest with the images')


def build_parser() -> argparse.ArgumentParser:
    """
    Build the parser of the `staintk` command line.
    """
    common = _global_options()
    separation = _separation_options()

    parser = argparse.ArgumentParser(prog='staintk',
                                     description='Stain separation, normalization, augmentation, '
                                                 'and evaluation of H&E segmentation datasets.')
    parser.add_argument('--version', action='version', version=f'%(prog)s {staintk.__version__}')
    subparsers = parser.add_subparsers(dest='command', metavar='COMMAND')
    subparsers.required = True

    p = subparsers.add_parser('separate', parents=[common, separation],
                              help='separate the stains of an image')
    p.add_argument('image', help='path to the image')
    p.set_defaults(func=cmd_separate)

    p = subparsers.add_parser('normalize', parents=[common, separation],
                              help='normalize images to a target stain profile')
    _add_inputs(p)
    p.add_argument('--target', required=True, help='the target stain profile JSON, e.g. `stains.json`')
    p.set_defaults(func=cmd_normalize)

    p = subparsers.add_parser('augment', parents=[common, separation],
                              help='write color-augmented variants of a dataset')
    p.add_argument('--manifest', required=True, help='CSV manifest with the images')
    p.add_argument('--policy', nargs=2, type=float, default=[.25, .25], metavar=('P_RANDSTAINNA', 'P_STAIN_SEP'),
                   help='probabilities of the RandStainNA and the stain separation branches (default: .25 .25)')
    p.add_argument('--prior', help='the statistics prior JSON, required if P_RANDSTAINNA > 0')
    p.add_argument('--n', type=int, default=1, help='number of variants per image (default: %(default)s)')
    p.add_argument('--scale-sigma', type=float, default=.05,
                   help='std of the log-scale perturbation of the stain matrix (default: %(default)s)')
    p.add_argument('--max-attempts', type=int, default=10,
                   help='separation attempts before falling back to identity (default: %(default)s)')
    p.set_defaults(func=cmd_augment)

    p = subparsers.add_parser('fit-prior', parents=[common], help='fit the RandStainNA statistics prior')
    _add_inputs(p)
    p.set_defaults(func=cmd_fit_prior)

    p = subparsers.add_parser('evaluate', parents=[common], help='score predicted masks')
    p.add_argument('--manifest', required=True, help='CSV manifest with `mask_path` and `pred_path` columns')
    p.add_argument('--model', help='toy model parameters JSON to predict the masks instead of `pred_path`')
    p.add_argument('--neighborhood', action='store_true', help='the model uses the neighborhood features')
    p.add_argument('--tta', choices=('off', 'on'), default='off',
                   help='average the model logits over the four 90° rotations (default: %(default)s)')
    p.set_defaults(func=cmd_evaluate)

    p = subparsers.add_parser('train-toy', parents=[common], help='train the toy multi-task model')
    p.add_argument('--manifest', required=True, help='CSV manifest with the training images and masks')
    p.add_argument('--alpha', type=float, default=.3,
                   help='weight of the reconstruction loss (default: %(default)s)')
    p.add_argument('--alpha-grid', type=float, nargs='+',
                   help='choose alpha from the grid by the validation COSAS score and write `alpha_grid.json`')
    p.add_argument('--val-manifest', help='validation manifest of the alpha grid (default: the training manifest)')
    p.add_argument('--lr', type=float, default=.1, help='learning rate (default: %(default)s)')
    p.add_argument('--steps', type=int, default=100, help='number of gradient steps (default: %(default)s)')
    p.add_argument('--stains', type=int, default=2, help='number of stains of the model (default: %(default)s)')
    p.add_argument('--init-scale', type=float, default=.1,
                   help='std of the initial parameters (default: %(default)s)')
    p.add_argument('--neighborhood', action='store_true', help='add the 3×3 neighborhood mean to the features')
    p.set_defaults(func=cmd_train_toy)

    p = subparsers.add_parser('gradcheck', parents=[common],
                              help='check the loss gradient against finite differences')
    p.add_argument('--alpha', type=float, default=.3, help='weight of the reconstruction loss (default: %(default)s)')
    p.add_argument('--epsilon', type=float, default=1e-5, help='finite difference step (default: %(default)s)')
    p.add_argument('--pixels', type=int, default=16, help='number of random pixels (default: %(default)s)')
    p.add_argument('--features', type=int, default=3, help='number of features (default: %(default)s)')
    p.add_argument('--stains', type=int, default=2, help='number of stains (default: %(default)s)')
    p.set_defaults(func=cmd_gradcheck)

    p = subparsers.add_parser('split-folds', parents=[common], help='split a manifest into stratified folds')
    p.add_argument('--manifest', required=True, help='CSV manifest to split')
    p.add_argument('--k', type=int, default=4, help='number of folds (default: %(default)s)')
    p.add_argument('--by', default='scanner', help='stratification column (default: %(default)s)')
    p.set_defaults(func=cmd_split_folds)

    return parser


def exit_code_of(e: BaseException) -> typing.Optional[int]:
    """
    Map an exception to the exit code of the command line or `None` if the exception is unexpected.
    """
    if isinstance(e, NonFiniteLossError):
        return EXIT_NUMERIC
    if isinstance(e, (FormatError, OSError)):
        return EXIT_IO
    if isinstance(e, ValueError):
        return EXIT_INVALID
    return None


def _report_error(e: BaseException, code: int):
    payload = {'error': type(e).__name__, 'message': str(e), 'exit_code': code}
    if isinstance(e, NonFiniteLossError):
        payload['step'] = e.step
    if isinstance(e, ParseError) and e.line_number is not None:
        payload['line_number'] = e.line_number
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


def main(argv: typing.Optional[typing.Sequence[str]] = None) -> int:
    """
    Run the `staintk` command line.

    :param argv: the arguments or `None` to use `sys.argv`.
    :return: the exit code: `0` on success, `1` on an I/O error, `2` on invalid input or a domain failure,
      and `3` on a numerical failure.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error(f'--threads must be positive but was {args.threads}')

    handler = setup_logging(parse_log_level(args.log_level), stream=sys.stderr)
    try:
        logger.info('Running `%s` with seed %d', args.command, args.seed)
        return args.func(args)
    except Exception as e:
        code = exit_code_of(e)
        if code is None:
            raise
        logger.debug('Command `%s` failed', args.command, exc_info=True)
        _report_error(e, code)
        return code
    finally:
        logging.getLogger().removeHandler(handler)
