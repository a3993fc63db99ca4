import numpy as np

from staintk.errors import InvalidInputError
from staintk.model import SegMask
from staintk.util import validate_instance


def dice(pred: SegMask, gt: SegMask) -> float:
    """
    Compute the Dice score :math:`2|P \\cap G| / (|P| + |G|)`. Two empty masks score `1`.

    >>> import numpy as np
    >>> from staintk.model import SegMask
    >>> dice(SegMask(np.array([[1, 1, 0]])), SegMask(np.array([[0, 1, 1]])))
    0.5

    :raises InvalidInputError: if the masks have different dimensions.
    """
    p, g = _check_pair(pred, gt)
    total = np.count_nonzero(p) + np.count_nonzero(g)
    if total == 0:
        return 1.
    return 2. * np.count_nonzero(p & g) / total


def iou(pred: SegMask, gt: SegMask) -> float:
    """
    Compute the intersection over union :math:`|P \\cap G| / |P \\cup G|`. Two empty masks score `1`.

    :raises InvalidInputError: if the masks have different dimensions.
    """
    p, g = _check_pair(pred, gt)
    union = np.count_nonzero(p | g)
    if union == 0:
        return 1.
    return np.count_nonzero(p & g) / union


def cosas_score(dice_score: float, iou_score: float) -> float:
    """
    Compute the COSAS score, the mean of the Dice and IoU scores.

    The score is a binary float, hence it matches decimal arithmetic up to rounding.
    The command line prints three decimals:

    >>> score = cosas_score(.887, .805)
    >>> abs(score - .846) < 1e-15
    True
    >>> f"{score:.3f}"
    '0.846'
    """
    for name, value in (('dice_score', dice_score), ('iou_score', iou_score)):
        if not 0. <= value <= 1.:
            raise InvalidInputError(f'{name} must be in [0, 1] but was {value}')
    return (dice_score + iou_score) / 2.


def threshold_logits(logits: np.ndarray, tau: float = 0.) -> SegMask:
    """
    Get the mask of pixels whose logit is above `tau`. The default `tau = 0` is the probability `0.5`.

    :param logits: a `(height, width)` array of finite logits.
    :param tau: the threshold on the logit scale.
    """
    logits = np.asarray(logits, dtype=float)
    if not np.all(np.isfinite(logits)):
        raise InvalidInputError('Logits must be finite')
    return SegMask(logits > tau)


def _check_pair(pred: SegMask, gt: SegMask):
    pred = validate_instance(pred, SegMask, 'pred')
    gt = validate_instance(gt, SegMask, 'gt')
    if pred.shape != gt.shape:
        raise InvalidInputError(f'Prediction shape {pred.shape} does not match the ground truth {gt.shape}')
    return pred.values, gt.values
