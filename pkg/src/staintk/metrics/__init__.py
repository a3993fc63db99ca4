"""
The `staintk.metrics` package scores segmentation masks by Dice, IoU, and COSAS (the mean of the two),
runs the four-orientation test-time augmentation, and aggregates the scores of a dataset.

>>> import numpy as np
>>> from staintk.model import SegMask
>>> pred, gt = SegMask(np.array([[1, 1, 0, 0]])), SegMask(np.array([[0, 1, 1, 0]]))
>>> d, i = dice(pred, gt), iou(pred, gt)
>>> round(cosas_score(d, i), 4)
0.4167
"""

from ._scores import dice, iou, cosas_score, threshold_logits
from ._tta import Predictor, TtaSpace, tta_predict
from ._report import EvaluationPair, ImageScores, Aggregate, MetricsReport, score_pair, evaluate_dataset

__all__ = [
    'dice', 'iou', 'cosas_score', 'threshold_logits',
    'Predictor', 'TtaSpace', 'tta_predict',
    'EvaluationPair', 'ImageScores', 'Aggregate', 'MetricsReport', 'score_pair', 'evaluate_dataset',
]
