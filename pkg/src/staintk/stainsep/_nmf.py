import logging
import typing

import numpy as np

from staintk.constants import HEMATOXYLIN, REFERENCE_STAINS
from staintk.errors import InvalidInputError, InsufficientTissueError
from staintk.model import OdImage, StainMatrix, StainDensity, normalize_columns
from staintk.util import make_rng, validate_instance

from ._config import SeparationConfig
from ._nnls import nonnegative_projection

logger = logging.getLogger(__name__)

MIN_TISSUE_PIXELS_PER_STAIN = 10
"""
The separation needs at least this many tissue pixels per stain.
"""

DEGENERACY_COSINE = .999
"""
Two stain columns with cosine similarity above the threshold are considered degenerate.
"""

INIT_NOISE = .05
MAX_STEP_HALVINGS = 30
MAX_STEP_DOUBLINGS = 4
_EPS = 1e-12


class StainSeparation:
    """
    The outcome of :func:`estimate_stains`.

    The separation can be unpacked into the stain matrix and the density, as in `W, H = estimate_stains(od)`.

    :param stains: the fitted stain matrix `W`.
    :param density: the stain density `H` of all pixels.
    :param n_iter: the number of multiplicative-update iterations that were run.
    :param converged: `True` if the relative objective change dropped below the tolerance before `max_iters`.
    :param objective: the objective value before the first and after each iteration.
    :param degenerate: `True` if two stain columns are (nearly) parallel.
    :param n_tissue: the number of tissue pixels used to fit `W`.
    """

    def __init__(self, stains: StainMatrix,
                 density: StainDensity,
                 n_iter: int,
                 converged: bool,
                 objective: typing.Sequence[float],
                 degenerate: bool,
                 n_tissue: int):
        self._stains = validate_instance(stains, StainMatrix, 'stains')
        self._density = validate_instance(density, StainDensity, 'density')
        if self._stains.r != self._density.r:
            raise InvalidInputError(f'Stain count mismatch: W has {self._stains.r} but H has {self._density.r} stains')
        self._n_iter = n_iter
        self._converged = converged
        self._objective = tuple(float(o) for o in objective)
        self._degenerate = degenerate
        self._n_tissue = n_tissue

    @property
    def stains(self) -> StainMatrix:
        return self._stains

    @property
    def density(self) -> StainDensity:
        return self._density

    @property
    def n_iter(self) -> int:
        return self._n_iter

    @property
    def converged(self) -> bool:
        return self._converged

    @property
    def objective(self) -> typing.Sequence[float]:
        return self._objective

    @property
    def degenerate(self) -> bool:
        return self._degenerate

    @property
    def n_tissue(self) -> int:
        return self._n_tissue

    def __iter__(self):
        return iter((self._stains, self._density))

    def __repr__(self):
        return (f'StainSeparation(r={self._stains.r}, n_iter={self._n_iter}, converged={self._converged}, '
                f'degenerate={self._degenerate}, n_tissue={self._n_tissue})')


def tissue_mask(od: OdImage, threshold: float = .15) -> np.ndarray:
    """
    Get a `bool` array with `n` elements, `True` for pixels whose OD L2 norm is above the `threshold`.

    >>> import numpy as np
    >>> from staintk.model import OdImage
    >>> tissue_mask(OdImage(np.array([[0., .3], [0., .4], [0., 0.]])), threshold=.15).tolist()
    [False, True]
    """
    od = validate_instance(od, OdImage, 'od')
    return np.linalg.norm(od.values, axis=0) > threshold


def separation_objective(x: np.ndarray, w: np.ndarray, h: np.ndarray, sparsity: float) -> float:
    """
    Compute :math:`\\|X - WH\\|_F^2 + λ \\sum H`.
    """
    residual = x - w @ h
    return float(np.sum(residual * residual) + sparsity * np.sum(h))


def estimate_stains(od: OdImage, cfg: typing.Optional[SeparationConfig] = None) -> StainSeparation:
    """
    Factorize the optical density of the tissue pixels into the stain matrix `W` and the stain density `H`
    by sparse non-negative matrix factorization.

    `W` starts from the reference stains perturbed by seeded noise and `H` from the non-negative projection.
    Then we alternate multiplicative updates of `H` and `W`. The reconstruction uses the column-normalized `W`,
    so the `W` update follows the gradient on the unit sphere and the scale of the update never leaks
    into the L1 term. A step that would increase the objective is damped or rejected, hence the objective
    never increases. The fit stops when the relative decrease drops to `cfg.tol`, or when neither update
    decreases the objective (not converged).

    The tissue pixels keep the sparse densities of the final iterate, and the background pixels get the projection
    onto the fitted `W`. With `cfg.refit_density`, all pixels get the unpenalized projection instead.

    :param od: the optical density image with 3 channels.
    :param cfg: the separation parameters or `None` for the defaults.
    :return: the separation with the canonically ordered stain matrix.
    :raises InsufficientTissueError: if there are fewer than `10 × r` tissue pixels.
    """
    od = validate_instance(od, OdImage, 'od')
    cfg = SeparationConfig() if cfg is None else validate_instance(cfg, SeparationConfig, 'cfg')
    if od.m != len(HEMATOXYLIN):
        raise InvalidInputError(f'Stain separation needs {len(HEMATOXYLIN)} channels but got {od.m}')
    if cfg.n_stains > od.m:
        raise InvalidInputError(f'Cannot separate {cfg.n_stains} stains from {od.m} channels')

    r = cfg.n_stains
    mask = tissue_mask(od, cfg.tissue_od_threshold)
    n_tissue = int(np.count_nonzero(mask))
    n_required = MIN_TISSUE_PIXELS_PER_STAIN * r
    if n_tissue < n_required:
        raise InsufficientTissueError(n_tissue, n_required)

    v = od.values[:, mask]
    lam = cfg.sparsity

    w = _initial_stains(r, cfg.seed)
    h = nonnegative_projection(w, v, lam)
    obj = separation_objective(v, w, h, lam)
    trace = [obj]
    converged = False
    n_iter = 0

    for n_iter in range(1, cfg.max_iters + 1):
        previous = obj

        h_new = h * (w.T @ v) / (w.T @ w @ h + lam / 2. + _EPS)
        obj_h = separation_objective(v, w, h_new, lam)
        if obj_h < obj:
            h, obj = h_new, obj_h

        w, obj = _update_stains(v, w, h, lam, obj)

        trace.append(obj)
        change = previous - obj
        if change <= 0.:
            logger.debug('Sparse NMF stalled at iteration %d', n_iter)
            break
        if change <= cfg.tol * max(abs(previous), _EPS):
            converged = True
            break

    logger.debug('Sparse NMF ran %d iterations, objective %.6g -> %.6g', n_iter, trace[0], trace[-1])
    if not converged:
        logger.info('Sparse NMF did not converge in %d iterations', n_iter)

    if cfg.refit_density:
        density = nonnegative_projection(w, od.values)
    else:
        density = np.zeros((r, od.n))
        density[:, mask] = h
        if not np.all(mask):
            density[:, ~mask] = nonnegative_projection(w, od.values[:, ~mask])

    order = canonical_order(w)
    stains = StainMatrix(w[:, order])
    degenerate = is_degenerate(stains)
    if degenerate:
        logger.warning('Found nearly parallel stain columns in the separation')

    return StainSeparation(
        stains=stains,
        density=StainDensity(density[order], od.height, od.width),
        n_iter=n_iter,
        converged=converged,
        objective=trace,
        degenerate=degenerate,
        n_tissue=n_tissue,
    )


def _update_stains(v: np.ndarray, w: np.ndarray, h: np.ndarray, lam: float,
                   obj: float) -> typing.Tuple[np.ndarray, float]:
    # Multiplicative update for unit-norm columns, from the positive and the negative part of the gradient
    # projected on the unit sphere. The step is halved until the objective decreases,
    # and a full step is doubled while the objective keeps decreasing.
    vh = v @ h.T
    whh = w @ (h @ h.T)
    numerator = vh + w * np.sum(whh * w, axis=0)
    denominator = whh + w * np.sum(vh * w, axis=0) + _EPS
    step = w * numerator / denominator - w

    t = 1.
    for _ in range(MAX_STEP_HALVINGS):
        best, best_obj = _step_stains(v, w, h, lam, step, t)
        if best_obj < obj:
            break
        t /= 2.
    else:
        return w, obj

    if t == 1.:
        for _ in range(MAX_STEP_DOUBLINGS):
            t *= 2.
            candidate, obj_t = _step_stains(v, w, h, lam, step, t)
            if obj_t >= best_obj:
                break
            best, best_obj = candidate, obj_t
    return best, best_obj


def _step_stains(v: np.ndarray, w: np.ndarray, h: np.ndarray, lam: float,
                 step: np.ndarray, t: float) -> typing.Tuple[np.ndarray, float]:
    candidate = np.maximum(w + t * step, 0.)
    norms = np.linalg.norm(candidate, axis=0)
    # A vanishing column keeps its previous value.
    candidate = np.where(norms > 0., candidate / np.where(norms > 0., norms, 1.), w)
    return candidate, separation_objective(v, candidate, h, lam)


def project_density(stains: StainMatrix, od: OdImage) -> StainDensity:
    """
    Get the non-negative least-squares densities of all pixels of `od` for the `stains`.

    Unlike the sparse densities of :func:`estimate_stains`, the projection has no L1 shrinkage,
    and `reconstruct(stains, project_density(stains, od))` is the closest rendering of `od` by the `stains`.

    >>> import numpy as np
    >>> from staintk.model import OdImage, StainMatrix
    >>> project_density(StainMatrix(np.eye(3)[:, :2]), OdImage(np.array([[.5], [.25], [1.]]))).values.ravel().tolist()
    [0.5, 0.25]
    """
    stains = validate_instance(stains, StainMatrix, 'stains')
    od = validate_instance(od, OdImage, 'od')
    if stains.m != od.m:
        raise InvalidInputError(f'Cannot project {od.m}-channel density onto {stains.m}-channel stains')
    return StainDensity(nonnegative_projection(stains.values, od.values), od.height, od.width)


def canonical_order(w: np.ndarray) -> typing.List[int]:
    """
    Get the column order with the most hematoxylin-like stain first.

    The columns are sorted by descending cosine similarity to the reference hematoxylin,
    ties are broken by larger first-channel value.
    """
    w = np.asarray(w, dtype=float)
    norms = np.linalg.norm(w, axis=0)
    cosines = (HEMATOXYLIN @ w) / np.where(norms > 0., norms, 1.)
    return sorted(range(w.shape[1]), key=lambda j: (-round(float(cosines[j]), 12), -float(w[0, j])))


def is_degenerate(stains: StainMatrix) -> bool:
    """
    Test if any two columns of the stain matrix have cosine similarity above :data:`DEGENERACY_COSINE`.
    """
    sim = stains.cosine_similarity(stains)
    upper = sim[np.triu_indices(stains.r, k=1)]
    return bool(np.any(upper > DEGENERACY_COSINE))


def reconstruct(stains: StainMatrix, density: StainDensity) -> OdImage:
    """
    Compute the optical density :math:`WH`.

    >>> import numpy as np
    >>> from staintk.model import StainMatrix, StainDensity
    >>> od = reconstruct(StainMatrix(np.eye(3)[:, :1]), StainDensity(np.ones((1, 2))))
    >>> od.values.tolist()
    [[1.0, 1.0], [0.0, 0.0], [0.0, 0.0]]

    :raises InvalidInputError: if the stain counts of `W` and `H` disagree.
    """
    stains = validate_instance(stains, StainMatrix, 'stains')
    density = validate_instance(density, StainDensity, 'density')
    if stains.r != density.r:
        raise InvalidInputError(f'Cannot multiply a {stains.m}×{stains.r} stain matrix with '
                                f'a {density.r}×{density.n} density')
    return OdImage(stains.values @ density.values, density.height, density.width)


def density_percentile(density: StainDensity, p: float = 99.) -> np.ndarray:
    """
    Get the `p`-th percentile of each stain density row, using the nearest-rank definition.

    >>> import numpy as np
    >>> from staintk.model import StainDensity
    >>> density_percentile(StainDensity(np.arange(1, 101, dtype=float)[None, :]), 99.).tolist()
    [99.0]

    :param density: the stain density.
    :param p: the percentile in :math:`(0, 100]`.
    :return: an array with `r` values.
    """
    density = validate_instance(density, StainDensity, 'density')
    if not 0. < p <= 100.:
        raise InvalidInputError(f'Percentile must be in (0, 100] but was {p}')
    n = density.n
    rank = max(int(np.ceil(p * n / 100.)), 1)
    ordered = np.sort(density.values, axis=1)
    return ordered[:, rank - 1].copy()


def _initial_stains(r: int, seed: int) -> np.ndarray:
    rng = make_rng(seed, 0)
    reference = np.column_stack(REFERENCE_STAINS[:r])
    noise = rng.uniform(0., INIT_NOISE, size=reference.shape)
    return normalize_columns(reference + noise)
