"""
The `staintk.mtl` package implements the joint multi-task loss on a per-pixel model with a stain density head,
a stain matrix head, and a classification head over the concatenated outputs of the two.

The total loss is :math:`α L_{recon} + L_{seg}`:

>>> import numpy as np
>>> params = ToyModelParams.zeros(d=3, r=2)
>>> batch = PixelBatch(np.zeros((4, 3)), np.zeros((4, 3)), [0, 1, 0, 1])
>>> res = forward(params, batch)
>>> round(float(res.h_hat[0, 0]), 4)
0.6931
"""

from ._model import ToyModelParams, PixelBatch, ForwardResult, forward, softplus, sigmoid, PARAM_NAMES
from ._loss import LossWeights, LossValues, reconstruction_loss, segmentation_loss, total_loss, compute_losses
from ._loss import gradients, finite_diff_check
from ._train import TrainingTrace, train, AlphaScore, AlphaGridResult, alpha_grid_search
from ._batch import pixel_features, make_pixel_batch, ToyModelPredictor

__all__ = [
    'ToyModelParams', 'PixelBatch', 'ForwardResult', 'forward', 'softplus', 'sigmoid', 'PARAM_NAMES',
    'LossWeights', 'LossValues', 'reconstruction_loss', 'segmentation_loss', 'total_loss', 'compute_losses',
    'gradients', 'finite_diff_check',
    'TrainingTrace', 'train', 'AlphaScore', 'AlphaGridResult', 'alpha_grid_search',
    'pixel_features', 'make_pixel_batch', 'ToyModelPredictor',
]
