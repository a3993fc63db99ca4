import logging
import typing

import numpy as np

from staintk.errors import InvalidInputError
from staintk.util import validate_instance

from ._model import ToyModelParams, PixelBatch, ForwardResult, PARAM_NAMES
from ._model import sigmoid, _forward_arrays, _check_compatible

logger = logging.getLogger(__name__)


class LossWeights:
    """
    Weights of the joint loss :math:`α L_{recon} + L_{seg}`.

    :param alpha: the non-negative weight of the reconstruction loss.
    """

    def __init__(self, alpha: float = .3):
        if not alpha >= 0.:
            raise InvalidInputError(f'alpha must be non-negative but was {alpha}')
        self._alpha = float(alpha)

    @property
    def alpha(self) -> float:
        return self._alpha

    def __eq__(self, other):
        return isinstance(other, LossWeights) and self._alpha == other._alpha

    def __hash__(self):
        return hash(self._alpha)

    def __repr__(self):
        return f'LossWeights(alpha={self._alpha})'


def reconstruction_loss(res: ForwardResult, batch: PixelBatch) -> float:
    """
    Compute the mean squared error between the reconstructed and the target optical density.
    """
    if res.recon.shape != batch.od_target.shape:
        raise InvalidInputError(f'Reconstruction shape {res.recon.shape} does not match '
                                f'the target {batch.od_target.shape}')
    return float(_mse(res.recon, batch.od_target))


def segmentation_loss(res: ForwardResult, batch: PixelBatch) -> float:
    """
    Compute the mean binary cross-entropy of the logits, finite for any finite logit.

    >>> import numpy as np
    >>> from staintk.mtl import ForwardResult, PixelBatch
    >>> batch = PixelBatch(np.zeros((2, 1)), np.zeros((2, 3)), [0, 1])
    >>> res = ForwardResult(None, None, np.zeros(2), None)
    >>> round(segmentation_loss(res, batch), 6)
    0.693147
    """
    if res.logits.shape != batch.labels.shape:
        raise InvalidInputError(f'Logit shape {res.logits.shape} does not match the labels {batch.labels.shape}')
    return float(_bce(res.logits, batch.labels))


def total_loss(weights: LossWeights, recon: float, seg: float) -> float:
    """
    Combine the losses into :math:`α L_{recon} + L_{seg}`.

    >>> round(total_loss(LossWeights(.3), 1., .5), 12)
    0.8
    """
    weights = validate_instance(weights, LossWeights, 'weights')
    return weights.alpha * recon + seg


class LossValues:
    """
    The reconstruction, segmentation, and total loss of a batch.
    """

    def __init__(self, recon: float, seg: float, total: float):
        self._recon = recon
        self._seg = seg
        self._total = total

    @property
    def recon(self) -> float:
        return self._recon

    @property
    def seg(self) -> float:
        return self._seg

    @property
    def total(self) -> float:
        return self._total

    def __repr__(self):
        return f'LossValues(recon={self._recon}, seg={self._seg}, total={self._total})'


def compute_losses(params: ToyModelParams, batch: PixelBatch, weights: LossWeights) -> LossValues:
    _check_compatible(params, batch)
    h_hat, w_flat, logits, recon = _forward_arrays(params.arrays(), batch.features, params.m, params.r)
    l_recon = float(_mse(recon, batch.od_target))
    l_seg = float(_bce(logits, batch.labels))
    return LossValues(l_recon, l_seg, total_loss(weights, l_recon, l_seg))


def gradients(params: ToyModelParams, batch: PixelBatch, weights: LossWeights) -> ToyModelParams:
    """
    Compute the gradient of the total loss with respect to all model parameters by backpropagation.

    :return: the gradient, packed as parameters of the same shapes.
    """
    params = validate_instance(params, ToyModelParams, 'params')
    batch = validate_instance(batch, PixelBatch, 'batch')
    weights = validate_instance(weights, LossWeights, 'weights')
    _check_compatible(params, batch)

    arrays = params.arrays()
    x = batch.features
    n, m, r = batch.n, params.m, params.r

    z_h = x @ arrays['a_h'] + arrays['b_h']
    z_w = x @ arrays['a_w'] + arrays['b_w']
    h_hat, w_flat, logits, recon = _forward_arrays(arrays, x, m, r)
    w_hat = w_flat.reshape(n, m, r)
    concat = np.concatenate([h_hat, w_flat], axis=1)

    g_recon = weights.alpha * 2. * (recon - batch.od_target) / (n * m)
    g_logit = (sigmoid(logits) - batch.labels) / n

    d_concat = np.outer(g_logit, arrays['a_c'])
    d_h = d_concat[:, :r] + np.einsum('nm,nmr->nr', g_recon, w_hat)
    d_w = d_concat[:, r:] + np.einsum('nm,nr->nmr', g_recon, h_hat).reshape(n, m * r)

    d_zh = d_h * sigmoid(z_h)
    d_zw = d_w * sigmoid(z_w)

    return ToyModelParams(
        a_h=x.T @ d_zh,
        b_h=d_zh.sum(axis=0),
        a_w=x.T @ d_zw,
        b_w=d_zw.sum(axis=0),
        a_c=concat.T @ g_logit,
        b_c=g_logit.sum(),
    )


def finite_diff_check(params: ToyModelParams,
                      batch: PixelBatch,
                      weights: LossWeights,
                      epsilon: float = 1e-5,
                      grads: typing.Optional[ToyModelParams] = None) -> float:
    """
    Compare the analytic gradient with central finite differences of the total loss.

    The perturbed losses are evaluated in extended precision (where the platform has it) to keep
    the cancellation error of the differences small.

    :param params: the parameters to check at.
    :param batch: the pixels.
    :param weights: the loss weights.
    :param epsilon: the step of the central differences.
    :param grads: the gradient to check or `None` to check :func:`gradients`.
    :return: the maximum over all parameters of :math:`|a - n| / \\max(|a|, |n|, 10^{-8})`.
    """
    if not epsilon > 0.:
        raise InvalidInputError(f'epsilon must be positive but was {epsilon}')
    if grads is None:
        grads = gradients(params, batch, weights)

    base = {name: np.array(arr, dtype=np.longdouble) for name, arr in params.arrays().items()}
    x = np.array(batch.features, dtype=np.longdouble)
    target = np.array(batch.od_target, dtype=np.longdouble)
    labels = np.array(batch.labels, dtype=np.longdouble)
    alpha = np.longdouble(weights.alpha)
    eps = np.longdouble(epsilon)

    def loss(arrays):
        _, _, logits, recon = _forward_arrays(arrays, x, params.m, params.r)
        return alpha * _mse(recon, target) + _bce(logits, labels)

    worst = 0.
    analytic = grads.arrays()
    for name in PARAM_NAMES:
        values = base[name]
        flat = values.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + eps
            upper = loss(base)
            flat[i] = original - eps
            lower = loss(base)
            flat[i] = original
            numeric = float((upper - lower) / (2 * eps))
            a = float(np.reshape(analytic[name], -1)[i])
            error = abs(a - numeric) / max(abs(a), abs(numeric), 1e-8)
            if error > worst:
                worst = error
    logger.debug('Finite-difference check of %d parameters, max relative error %.3g', params.n_params(), worst)
    return worst


def _mse(recon: np.ndarray, target: np.ndarray):
    residual = recon - target
    return np.mean(residual * residual)


def _bce(logits: np.ndarray, labels: np.ndarray):
    return np.mean(np.maximum(logits, 0) - logits * labels + np.log1p(np.exp(-np.abs(logits))))
