import csv
import logging
import math
import os
import shutil
import typing
from collections import Counter, namedtuple

import numpy as np

from staintk.augment import AugmentationBranch, MixturePolicy, StatPrior, fit_stat_prior, mixture_augment
from staintk.color import rgb_to_od
from staintk.dataio import Manifest, ManifestRow, read_image, write_image, write_gray_image, read_mask
from staintk.dataio import stratified_kfold
from staintk.errors import InvalidInputError
from staintk.metrics import EvaluationPair, ImageScores, MetricsReport, score_pair, threshold_logits, tta_predict
from staintk.mtl import LossWeights, PixelBatch, ToyModelParams, ToyModelPredictor
from staintk.mtl import alpha_grid_search, finite_diff_check, make_pixel_batch, train
from staintk.stainsep import DEFAULT_PERCENTILE, StainProfile, density_percentile, estimate_stains
from staintk.stainsep import normalize_spcn, project_density, tissue_mask
from staintk.util import derive_seed, make_rng, open_text_io_handle_for_writing

from ._support import separation_config, perturb_config, read_text, write_text, write_json, ensure_dir
from ._support import load_manifest, image_rows, map_ordered, describe_error, check_not_overwriting

logger = logging.getLogger(__name__)

GRADCHECK_TOLERANCE = 1e-5
"""
The gradient check passes if the maximum relative error is below the tolerance.
"""

EXIT_OK = 0
EXIT_IO = 1
EXIT_INVALID = 2
EXIT_NUMERIC = 3


def cmd_separate(args) -> int:
    """
    Separate the stains of an image and write the stain matrix with a density summary and the density maps.
    """
    cfg = separation_config(args)
    img = read_image(args.image)
    od = rgb_to_od(img, cfg.i0)
    separation = estimate_stains(od, cfg)
    density = project_density(separation.stains, od)
    scale = density_percentile(density, DEFAULT_PERCENTILE)
    tissue = tissue_mask(od, cfg.tissue_od_threshold)

    out = ensure_dir(args.output)
    stains = separation.stains
    summary = []
    for i in range(stains.r):
        row = density.values[i]
        summary.append({
            'stain': i,
            'scale': float(scale[i]),
            'max': float(row.max()),
            'tissue_mean': float(row[tissue].mean()) if tissue.any() else 0.,
        })
        if scale[i] > 0.:
            scaled = np.clip(np.rint(density.row_image(i) / scale[i] * 255.), 0, 255).astype(np.uint8)
        else:
            scaled = np.zeros((img.height, img.width), dtype=np.uint8)
        write_gray_image(scaled, os.path.join(out, f'density_{i}.png'))

    write_json({
        'm': stains.m,
        'r': stains.r,
        'columns': stains.values.T.ravel().tolist(),
        'density_scale': scale.tolist(),
        'density': summary,
        'separation': {
            'n_iter': separation.n_iter,
            'converged': separation.converged,
            'degenerate': separation.degenerate,
            'n_tissue': separation.n_tissue,
            'objective': separation.objective[-1],
            'config': cfg.to_dict(),
        },
    }, os.path.join(out, 'stains.json'))

    if separation.degenerate:
        logger.warning('The stains of %s are degenerate', args.image)
    print(f'separated {stains.r} stains in {separation.n_iter} iterations '
          f'(converged={str(separation.converged).lower()}) into {out}')
    return EXIT_OK


def cmd_normalize(args) -> int:
    """
    Normalize images to the stains of a target profile, writing one image per input with the same basename.
    """
    target = StainProfile.from_json(read_text(args.target))
    cfg = separation_config(args)
    rows = image_rows(args)

    out = ensure_dir(args.output)
    outputs = [os.path.join(out, os.path.basename(row.image_path)) for row in rows]
    if len(set(outputs)) != len(outputs):
        raise InvalidInputError('Input images must have unique basenames')
    check_not_overwriting((row.image_path for row in rows), outputs)

    def normalize_row(i: int) -> typing.Dict[str, typing.Any]:
        row = rows[i]
        record = {'id': row.identifier, 'input': row.image_path, 'output': None, 'status': 'ok', 'error': None}
        try:
            normalized = normalize_spcn(read_image(row.image_path), target, cfg)
            write_image(normalized, outputs[i])
        except (ValueError, OSError) as e:
            logger.warning('Cannot normalize %s: %s', row.identifier, e)
            record.update(status='error', error=describe_error(e))
            return record
        record['output'] = outputs[i]
        return record

    records = map_ordered(normalize_row, range(len(rows)), args.threads)
    n_ok = sum(1 for record in records if record['status'] == 'ok')
    write_json({'images': records, 'n_ok': n_ok, 'n_failed': len(records) - n_ok},
               os.path.join(out, 'normalize_summary.json'))
    print(f'normalized {n_ok} of {len(records)} images into {out}')
    return EXIT_OK if n_ok > 0 else EXIT_INVALID


_Variant = namedtuple('_Variant', field_names=['row', 'variant', 'branch', 'seed', 'image_path', 'mask_path'])


def cmd_augment(args) -> int:
    """
    Write `n` color-augmented variants of every manifest image with the provenance of each variant.

    The variant `v` of the `i`-th row uses the stream `(seed, i, v)`, hence the output does not depend on the number
    of threads. Identity variants are byte copies of the inputs and the masks are copied unmodified.
    """
    policy = MixturePolicy(args.policy[0], args.policy[1])
    prior = StatPrior.from_json(read_text(args.prior)) if args.prior else None
    if policy.p_randstainna > 0. and prior is None:
        raise InvalidInputError('--prior is required when the RandStainNA probability is positive')
    if args.n < 1:
        raise InvalidInputError(f'--n must be positive but was {args.n}')
    cfg = separation_config(args)
    pcfg = perturb_config(args)
    manifest = load_manifest(args.manifest)

    out = ensure_dir(args.output)
    image_dir = ensure_dir(os.path.join(out, 'images'))
    mask_dir = ensure_dir(os.path.join(out, 'masks'))

    def output_path(directory: str, row: ManifestRow, source: str, variant: int) -> str:
        suffix = os.path.splitext(source)[1] or '.png'
        return os.path.join(directory, f'{row.identifier}_{variant}{suffix}')

    planned = [output_path(image_dir, row, row.image_path, v) for row in manifest for v in range(args.n)]
    planned += [output_path(mask_dir, row, row.mask_path, v)
                for row in manifest if row.mask_path for v in range(args.n)]
    check_not_overwriting([row.image_path for row in manifest] + [row.mask_path for row in manifest], planned)

    def augment_row(i: int) -> typing.Tuple[typing.List[_Variant], typing.Optional[str]]:
        row = manifest[i]
        variants = []
        try:
            img = read_image(row.image_path)
            for v in range(args.n):
                seed = derive_seed(args.seed, i, v)
                sample = mixture_augment(img, None, policy, make_rng(seed), prior, cfg, pcfg)
                image_out = output_path(image_dir, row, row.image_path, v)
                if sample.applied == AugmentationBranch.IDENTITY:
                    shutil.copyfile(row.image_path, image_out)
                else:
                    write_image(sample.image, image_out)
                mask_out = None
                if row.mask_path:
                    mask_out = output_path(mask_dir, row, row.mask_path, v)
                    shutil.copyfile(row.mask_path, mask_out)
                variants.append(_Variant(row, v, sample.applied, seed, image_out, mask_out))
        except (ValueError, OSError) as e:
            logger.warning('Cannot augment %s: %s', row.identifier, e)
            return [], describe_error(e)
        return variants, None

    results = map_ordered(augment_row, range(len(manifest)), args.threads)

    variants = [variant for row_variants, _ in results for variant in row_variants]
    failures = [{'id': manifest[i].identifier, 'error': error}
                for i, (_, error) in enumerate(results) if error is not None]
    _write_provenance(variants, out)
    Manifest(ManifestRow(f'{v.row.identifier}_{v.variant}',
                         os.path.relpath(v.image_path, out),
                         v.row.scanner,
                         mask_path=None if v.mask_path is None else os.path.relpath(v.mask_path, out),
                         fold=v.row.fold,
                         labels=v.row.labels)
             for v in variants).to_csv(os.path.join(out, 'manifest.csv'))

    branches = Counter(v.branch.value for v in variants)
    n_ok = len(manifest) - len(failures)
    write_json({
        'n_rows': len(manifest),
        'n_ok': n_ok,
        'n_failed': len(failures),
        'failures': failures,
        'branches': {branch.value: branches.get(branch.value, 0) for branch in AugmentationBranch},
    }, os.path.join(out, 'augment_summary.json'))
    print(f'augmented {n_ok} of {len(manifest)} images into {len(variants)} variants in {out}')
    return EXIT_OK if n_ok > 0 else EXIT_INVALID


def _write_provenance(variants: typing.Sequence[_Variant], out: str):
    with open_text_io_handle_for_writing(os.path.join(out, 'provenance.csv'), encoding='utf-8') as fh:
        writer = csv.writer(fh, lineterminator='\n')
        writer.writerow(['id', 'variant', 'branch', 'seed', 'image_path', 'mask_path'])
        for v in variants:
            writer.writerow([
                v.row.identifier, v.variant, v.branch.value, v.seed,
                os.path.relpath(v.image_path, out),
                '' if v.mask_path is None else os.path.relpath(v.mask_path, out),
            ])


def cmd_fit_prior(args) -> int:
    """
    Fit the LAB statistics prior of RandStainNA on the images of a template corpus.
    """
    rows = image_rows(args)
    images = map_ordered(lambda row: read_image(row.image_path), list(rows), args.threads)
    prior = fit_stat_prior(images)
    out = ensure_dir(args.output)
    write_text(prior.to_json(), os.path.join(out, 'prior.json'))
    print(f'fitted the prior on {prior.n_images} images into {out}')
    return EXIT_OK


def cmd_evaluate(args) -> int:
    """
    Score the predicted masks against the ground truth masks of a manifest.

    The predictions are read from the `pred_path` column, or predicted by a toy model (`--model`),
    optionally with test-time augmentation.
    """
    manifest = load_manifest(args.manifest)
    predictor = None
    if args.model:
        predictor = ToyModelPredictor(ToyModelParams.from_json(read_text(args.model)), neighborhood=args.neighborhood)
    use_tta = args.tta == 'on'
    if use_tta and predictor is None:
        raise InvalidInputError('--tta on needs a --model')

    def evaluate_row(row: ManifestRow) -> ImageScores:
        groups = row.groups()
        try:
            if row.mask_path is None:
                raise InvalidInputError(f'Row {row.identifier!r} has no mask_path')
            gt = read_mask(row.mask_path)
            if predictor is not None:
                img = read_image(row.image_path)
                logits = tta_predict(predictor, img) if use_tta else predictor(img)
                pred = threshold_logits(logits)
            elif row.pred_path is None:
                raise InvalidInputError(f'Row {row.identifier!r} has no pred_path')
            else:
                pred = read_mask(row.pred_path)
        except (ValueError, OSError) as e:
            logger.warning('Cannot evaluate %s: %s', row.identifier, e)
            return ImageScores(row.identifier, None, None, None, groups=groups, error=describe_error(e))
        return score_pair(EvaluationPair(row.identifier, pred, gt, groups))

    report = MetricsReport(map_ordered(evaluate_row, list(manifest), args.threads))
    out = ensure_dir(args.output)
    write_text(report.to_json(), os.path.join(out, 'metrics.json'))
    report.to_csv(os.path.join(out, 'metrics.csv'))

    mean = report.overall.mean
    if report.overall.n_images == 0:
        print('no image could be scored')
        return EXIT_INVALID
    print(f'cosas={mean["cosas"]:.3f} dice={mean["dice"]:.3f} iou={mean["iou"]:.3f}')
    return EXIT_OK


def _manifest_batches(manifest: Manifest, neighborhood: bool, n_threads: int) -> typing.List[PixelBatch]:
    def to_batch(row: ManifestRow) -> PixelBatch:
        mask = read_mask(row.mask_path) if row.mask_path else None
        return make_pixel_batch(read_image(row.image_path), mask, neighborhood)

    return map_ordered(to_batch, list(manifest), n_threads)


def cmd_train_toy(args) -> int:
    """
    Train the toy multi-task model on the pixels of the manifest images, optionally choosing `alpha` on a grid.
    """
    manifest = load_manifest(args.manifest)
    batches = _manifest_batches(manifest, args.neighborhood, args.threads)
    d = 6 if args.neighborhood else 3
    params = ToyModelParams.random(d, args.stains, make_rng(args.seed), scale=args.init_scale)
    out = ensure_dir(args.output)

    alpha = args.alpha
    if args.alpha_grid:
        val_manifest = manifest if args.val_manifest is None else load_manifest(args.val_manifest)
        val_batches = batches if args.val_manifest is None \
            else _manifest_batches(val_manifest, args.neighborhood, args.threads)
        grid = alpha_grid_search(params, batches, val_batches, args.alpha_grid, args.lr, args.steps, args.seed)
        write_text(grid.to_json(), os.path.join(out, 'alpha_grid.json'))
        alpha = grid.best_alpha
        print(f'best alpha={alpha:g} (cosas={grid.best.cosas:.3f})')

    trained, trace = train(params, batches, LossWeights(alpha), args.lr, args.steps, args.seed)
    write_text(trained.to_json(), os.path.join(out, 'params.json'))
    trace.to_csv(os.path.join(out, 'trace.csv'))
    print(f'trained {args.steps} steps with alpha={alpha:g}, total loss '
          f'{trace.totals()[0]:.6g} -> {trace.totals()[-1]:.6g}')
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    """
    Check the gradient of the joint loss against finite differences on a random problem drawn from `--seed`.
    """
    rng = make_rng(args.seed)
    n, d = args.pixels, args.features
    params = ToyModelParams.random(d, args.stains, rng, scale=.5)
    batch = PixelBatch(rng.normal(size=(n, d)), rng.uniform(0., 2., size=(n, 3)), rng.integers(0, 2, size=n))
    error = finite_diff_check(params, batch, LossWeights(args.alpha), epsilon=args.epsilon)
    print(f'max_rel_error={error:.3e}')
    if not math.isfinite(error) or error >= GRADCHECK_TOLERANCE:
        logger.error('Gradient check failed, the maximum relative error %.3e is not below %g',
                     error, GRADCHECK_TOLERANCE)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_split_folds(args) -> int:
    """
    Split the manifest into stratified cross-validation folds.
    """
    manifest = load_manifest(args.manifest)
    folds = stratified_kfold(manifest, args.k, args.seed, by=args.by)
    out = ensure_dir(args.output)
    write_text(folds.to_json(), os.path.join(out, 'folds.json'))
    print(f'split {len(folds)} images into {folds.k} folds of sizes {list(folds.fold_sizes())}')
    return EXIT_OK
