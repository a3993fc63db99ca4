import typing

from staintk.errors import InvalidInputError

MAX_CHANNELS = 3


class SeparationConfig:
    """
    Parameters of the sparse non-negative matrix factorization used to separate the stains.

    >>> cfg = SeparationConfig(n_stains=2, sparsity=0.)
    >>> cfg.n_stains, cfg.sparsity, cfg.max_iters
    (2, 0.0, 200)

    :param n_stains: the number of stains `r` in :math:`[1, 3]`.
    :param sparsity: the weight `λ` of the L1 penalty on the stain densities.
    :param max_iters: the maximum number of multiplicative-update iterations.
    :param tol: stop when the relative decrease of the objective falls below `tol`.
    :param tissue_od_threshold: pixels with OD L2 norm at or below the threshold are background.
    :param seed: seed of the initialization noise.
    :param i0: the reference intensity of the Beer-Lambert transform.
    :param refit_density: give all pixels the non-negative least-squares densities on the fitted stain matrix,
      without the L1 shrinkage. By default, the tissue pixels keep the sparse densities of the factorization.
    """

    def __init__(self, n_stains: int = 2,
                 sparsity: float = 0.1,
                 max_iters: int = 200,
                 tol: float = 1e-6,
                 tissue_od_threshold: float = 0.15,
                 seed: int = 42,
                 i0: float = 255.,
                 refit_density: bool = False):
        if not isinstance(n_stains, int) or not 1 <= n_stains <= MAX_CHANNELS:
            raise InvalidInputError(f'n_stains must be an `int` in [1, {MAX_CHANNELS}] but was {n_stains!r}')
        if sparsity < 0.:
            raise InvalidInputError(f'sparsity must be non-negative but was {sparsity}')
        if not isinstance(max_iters, int) or max_iters < 1:
            raise InvalidInputError(f'max_iters must be a positive `int` but was {max_iters!r}')
        if tol < 0.:
            raise InvalidInputError(f'tol must be non-negative but was {tol}')
        if tissue_od_threshold < 0.:
            raise InvalidInputError(f'tissue_od_threshold must be non-negative but was {tissue_od_threshold}')
        if not isinstance(seed, int) or seed < 0:
            raise InvalidInputError(f'seed must be a non-negative `int` but was {seed!r}')
        if not 1. <= i0 <= 255.:
            raise InvalidInputError(f'i0 must be in [1, 255] but was {i0}')

        self._n_stains = n_stains
        self._sparsity = float(sparsity)
        self._max_iters = max_iters
        self._tol = float(tol)
        self._tissue_od_threshold = float(tissue_od_threshold)
        self._seed = seed
        self._i0 = float(i0)
        self._refit_density = bool(refit_density)

    @property
    def n_stains(self) -> int:
        return self._n_stains

    @property
    def sparsity(self) -> float:
        return self._sparsity

    @property
    def max_iters(self) -> int:
        return self._max_iters

    @property
    def tol(self) -> float:
        return self._tol

    @property
    def tissue_od_threshold(self) -> float:
        return self._tissue_od_threshold

    @property
    def seed(self) -> int:
        return self._seed

    @property
    def i0(self) -> float:
        return self._i0

    @property
    def refit_density(self) -> bool:
        return self._refit_density

    def with_seed(self, seed: int) -> 'SeparationConfig':
        """
        Get a copy of the config with a different `seed`.
        """
        params = self.to_dict()
        params['seed'] = seed
        return SeparationConfig(**params)

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        return {
            'n_stains': self._n_stains,
            'sparsity': self._sparsity,
            'max_iters': self._max_iters,
            'tol': self._tol,
            'tissue_od_threshold': self._tissue_od_threshold,
            'seed': self._seed,
            'i0': self._i0,
            'refit_density': self._refit_density,
        }

    def __eq__(self, other):
        return isinstance(other, SeparationConfig) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(tuple(sorted(self.to_dict().items())))

    def __repr__(self):
        params = ', '.join(f'{k}={v!r}' for k, v in self.to_dict().items())
        return f'SeparationConfig({params})'
