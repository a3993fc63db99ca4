"""
The `staintk.stainsep` package separates an optical density image into the stain matrix and the stain density
by sparse non-negative matrix factorization, and normalizes stains while preserving the tissue structure.

Separate the stains of a synthetic patch:

>>> import numpy as np
>>> from staintk.constants import HEMATOXYLIN, EOSIN
>>> from staintk.model import StainMatrix
>>> from staintk.color import rgb_to_od
>>> stains = StainMatrix.from_columns([HEMATOXYLIN, EOSIN])
>>> patch = make_synthetic_patch(stains, 16, 16, np.random.default_rng(7))
>>> w, h = estimate_stains(rgb_to_od(patch.image), SeparationConfig(n_stains=2))
>>> bool(np.all(np.diag(w.cosine_similarity(stains)) > .99))
True
"""

from ._config import SeparationConfig
from ._nnls import nonnegative_projection
from ._nmf import StainSeparation, estimate_stains, tissue_mask, reconstruct, density_percentile
from ._nmf import separation_objective, canonical_order, is_degenerate, project_density
from ._profile import StainProfile, fit_profile, DEFAULT_PERCENTILE
from ._normalize import normalize_spcn
from ._synthetic import SyntheticPatch, make_synthetic_patch

__all__ = [
    'SeparationConfig',
    'nonnegative_projection',
    'StainSeparation', 'estimate_stains', 'tissue_mask', 'reconstruct', 'density_percentile',
    'separation_objective', 'canonical_order', 'is_degenerate', 'project_density',
    'StainProfile', 'fit_profile', 'DEFAULT_PERCENTILE',
    'normalize_spcn',
    'SyntheticPatch', 'make_synthetic_patch',
]
