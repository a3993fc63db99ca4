"""
The `staintk.augment` package implements the mixture of stain augmentations: perturbation of the stain matrix
obtained by stain separation, RandStainNA-style recoloring by LAB statistics, the mixture policy, and the flips.

>>> import numpy as np
>>> policy = MixturePolicy(p_randstainna=0., p_stain_sep=0.)
>>> policy.draw(np.random.default_rng(0))
<AugmentationBranch.IDENTITY: 'identity'>
"""

from ._config import PerturbConfig, MixturePolicy, AugmentationBranch
from ._stain import perturb_stain_matrix, stain_augment, StainAugmentation
from ._prior import StatPrior, fit_stat_prior, randstainna_augment
from ._mixture import AugmentedSample, mixture_augment
from ._geometric import flip, geometric_augment

__all__ = [
    'PerturbConfig', 'MixturePolicy', 'AugmentationBranch',
    'perturb_stain_matrix', 'stain_augment', 'StainAugmentation',
    'StatPrior', 'fit_stat_prior', 'randstainna_augment',
    'AugmentedSample', 'mixture_augment',
    'flip', 'geometric_augment',
]
