import csv
import json
import logging
import math
import typing

import numpy as np

from staintk.errors import InvalidInputError, NonFiniteLossError
from staintk.metrics import dice, iou, cosas_score, threshold_logits
from staintk.model import SegMask
from staintk.util import make_rng, open_text_io_handle_for_writing, validate_instance

from ._loss import LossWeights, compute_losses, gradients
from ._model import ToyModelParams, PixelBatch, forward

logger = logging.getLogger(__name__)


class TrainingTrace:
    """
    The losses at every step of gradient descent, recorded before the parameter update of the step.
    """

    HEADER = ('step', 'recon', 'seg', 'total')

    def __init__(self, rows: typing.Iterable[typing.Tuple[int, float, float, float]]):
        self._rows = tuple((int(step), float(recon), float(seg), float(total)) for step, recon, seg, total in rows)

    @property
    def rows(self) -> typing.Sequence[typing.Tuple[int, float, float, float]]:
        return self._rows

    def totals(self) -> np.ndarray:
        return np.array([row[3] for row in self._rows])

    def to_csv(self, fh: typing.Union[str, typing.IO]):
        handle = open_text_io_handle_for_writing(fh)
        try:
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(self.HEADER)
            for step, recon, seg, total in self._rows:
                writer.writerow([step, repr(recon), repr(seg), repr(total)])
        finally:
            if handle is not fh:
                handle.close()

    def __len__(self):
        return len(self._rows)

    def __eq__(self, other):
        return isinstance(other, TrainingTrace) and self._rows == other._rows

    def __hash__(self):
        return hash(self._rows)

    def __repr__(self):
        return f'TrainingTrace(n_steps={len(self._rows)})'


def train(params: ToyModelParams,
          batches: typing.Sequence[PixelBatch],
          weights: LossWeights,
          lr: float,
          steps: int,
          seed: int = 0) -> typing.Tuple[ToyModelParams, TrainingTrace]:
    """
    Train the toy model by plain gradient descent.

    Each pass over the batches visits them in an order drawn from `seed`, hence the training is deterministic.

    :param params: the initial parameters.
    :param batches: one or more training batches.
    :param weights: the loss weights.
    :param lr: the non-negative learning rate.
    :param steps: the number of steps.
    :param seed: the seed of the batch order.
    :return: the trained parameters and the loss trace.
    :raises NonFiniteLossError: if a loss becomes `NaN` or infinite.
    """
    params = validate_instance(params, ToyModelParams, 'params')
    batches = list(batches)
    if len(batches) == 0:
        raise InvalidInputError('Training needs at least one batch')
    if not lr >= 0.:
        raise InvalidInputError(f'lr must be non-negative but was {lr}')
    if not isinstance(steps, int) or steps < 1:
        raise InvalidInputError(f'steps must be a positive `int` but was {steps!r}')

    rng = make_rng(seed)
    order: typing.List[int] = []
    rows = []
    for step in range(steps):
        if not order:
            order = rng.permutation(len(batches)).tolist()
        batch = batches[order.pop(0)]

        losses = compute_losses(params, batch, weights)
        if not math.isfinite(losses.total):
            raise NonFiniteLossError(step)
        rows.append((step, losses.recon, losses.seg, losses.total))
        if lr > 0.:
            params = params.combine(gradients(params, batch, weights), -lr)

    logger.debug('Trained %d steps, total loss %.6g -> %.6g', steps, rows[0][3], rows[-1][3])
    return params, TrainingTrace(rows)


class AlphaScore:
    """
    Validation scores of a model trained with a given `alpha`.
    """

    def __init__(self, alpha: float, final_loss: float, dice_score: float, iou_score: float, cosas: float):
        self._alpha = alpha
        self._final_loss = final_loss
        self._dice = dice_score
        self._iou = iou_score
        self._cosas = cosas

    @property
    def alpha(self) -> float:
        return self._alpha

    @property
    def final_loss(self) -> float:
        return self._final_loss

    @property
    def dice(self) -> float:
        return self._dice

    @property
    def iou(self) -> float:
        return self._iou

    @property
    def cosas(self) -> float:
        return self._cosas

    def to_dict(self) -> typing.Dict[str, float]:
        return {
            'alpha': self._alpha,
            'final_loss': self._final_loss,
            'dice': self._dice,
            'iou': self._iou,
            'cosas': self._cosas,
        }

    def __repr__(self):
        return f'AlphaScore(alpha={self._alpha}, cosas={self._cosas})'


class AlphaGridResult:
    """
    The scores of all `alpha`\\ s of the grid and the best `alpha` (highest COSAS, ties go to the smaller `alpha`).
    """

    def __init__(self, scores: typing.Sequence[AlphaScore]):
        if len(scores) == 0:
            raise InvalidInputError('Alpha grid must not be empty')
        self._scores = tuple(sorted(scores, key=lambda s: s.alpha))
        best = self._scores[0]
        for score in self._scores[1:]:
            if score.cosas > best.cosas:
                best = score
        self._best = best

    @property
    def scores(self) -> typing.Sequence[AlphaScore]:
        return self._scores

    @property
    def best(self) -> AlphaScore:
        return self._best

    @property
    def best_alpha(self) -> float:
        return self._best.alpha

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        return {'best_alpha': self.best_alpha, 'scores': [s.to_dict() for s in self._scores]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True) + '\n'

    def __repr__(self):
        return f'AlphaGridResult(best_alpha={self.best_alpha}, n={len(self._scores)})'


def alpha_grid_search(params: ToyModelParams,
                      train_batches: typing.Sequence[PixelBatch],
                      val_batches: typing.Sequence[PixelBatch],
                      alphas: typing.Iterable[float],
                      lr: float,
                      steps: int,
                      seed: int = 0) -> AlphaGridResult:
    """
    Train a model per `alpha` from the same initial parameters and score the validation pixels.

    The validation pixels of all batches are pooled and the thresholded logits are scored
    by Dice, IoU, and COSAS.
    """
    val_batches = list(val_batches)
    if len(val_batches) == 0:
        raise InvalidInputError('Alpha grid search needs at least one validation batch')
    labels = np.concatenate([b.labels for b in val_batches]) > .5

    scores = []
    for alpha in alphas:
        weights = LossWeights(alpha)
        trained, trace = train(params, train_batches, weights, lr, steps, seed)
        logits = np.concatenate([forward(trained, b).logits for b in val_batches])
        pred = threshold_logits(logits[None, :])
        gt = SegMask(labels[None, :])
        d, i = dice(pred, gt), iou(pred, gt)
        scores.append(AlphaScore(weights.alpha, float(trace.totals()[-1]), d, i, cosas_score(d, i)))
        logger.info('alpha=%g: COSAS %.4f', weights.alpha, scores[-1].cosas)
    return AlphaGridResult(scores)
