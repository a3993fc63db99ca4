import enum
import typing

import numpy as np

from staintk.errors import InvalidInputError
from staintk.util import validate_probability


class PerturbConfig:
    """
    Parameters of the stain-matrix perturbation.

    :param scale_sigma: the standard deviation of the log-normal scaling applied to each entry of the stain matrix.
    :param max_attempts: the number of separations with derived seeds to try before giving up
      on a degenerate separation.
    """

    def __init__(self, scale_sigma: float = .05, max_attempts: int = 10):
        if not scale_sigma >= 0.:
            raise InvalidInputError(f'scale_sigma must be non-negative but was {scale_sigma}')
        if not isinstance(max_attempts, int) or max_attempts < 1:
            raise InvalidInputError(f'max_attempts must be a positive `int` but was {max_attempts!r}')
        self._scale_sigma = float(scale_sigma)
        self._max_attempts = max_attempts

    @property
    def scale_sigma(self) -> float:
        return self._scale_sigma

    @property
    def max_attempts(self) -> int:
        return self._max_attempts

    def __eq__(self, other):
        return isinstance(other, PerturbConfig) \
            and self._scale_sigma == other._scale_sigma \
            and self._max_attempts == other._max_attempts

    def __hash__(self):
        return hash((self._scale_sigma, self._max_attempts))

    def __repr__(self):
        return f'PerturbConfig(scale_sigma={self._scale_sigma}, max_attempts={self._max_attempts})'


class AugmentationBranch(enum.Enum):
    """
    The color augmentation applied to a sample.
    """

    IDENTITY = 'identity'
    """
    No color augmentation.
    """

    RANDSTAINNA = 'randstainna'
    """
    Recoloring by the statistics sampled from a :class:`StatPrior`.
    """

    STAIN_SEP = 'stain_sep'
    """
    Perturbation of the stain matrix obtained by stain separation.
    """


class MixturePolicy:
    """
    Probabilities of the color augmentation branches. The remaining probability mass goes to the identity.

    >>> policy = MixturePolicy(.25, .25)
    >>> policy.p_identity
    0.5

    :param p_randstainna: the probability of the RandStainNA-style recoloring.
    :param p_stain_sep: the probability of the stain-separation augmentation.
    """

    def __init__(self, p_randstainna: float = .25, p_stain_sep: float = .25):
        self._p_randstainna = validate_probability(p_randstainna, 'p_randstainna')
        self._p_stain_sep = validate_probability(p_stain_sep, 'p_stain_sep')
        if self._p_randstainna + self._p_stain_sep > 1.:
            raise InvalidInputError(f'Branch probabilities must sum to at most 1 but were '
                                    f'{self._p_randstainna} and {self._p_stain_sep}')

    @property
    def p_randstainna(self) -> float:
        return self._p_randstainna

    @property
    def p_stain_sep(self) -> float:
        return self._p_stain_sep

    @property
    def p_identity(self) -> float:
        return 1. - self._p_randstainna - self._p_stain_sep

    def probabilities(self) -> typing.Mapping[AugmentationBranch, float]:
        return {
            AugmentationBranch.RANDSTAINNA: self._p_randstainna,
            AugmentationBranch.STAIN_SEP: self._p_stain_sep,
            AugmentationBranch.IDENTITY: self.p_identity,
        }

    def draw(self, rng: np.random.Generator) -> AugmentationBranch:
        """
        Draw a branch using a single uniform variate from `rng`.
        """
        u = rng.random()
        if u < self._p_randstainna:
            return AugmentationBranch.RANDSTAINNA
        elif u < self._p_randstainna + self._p_stain_sep:
            return AugmentationBranch.STAIN_SEP
        else:
            return AugmentationBranch.IDENTITY

    def __eq__(self, other):
        return isinstance(other, MixturePolicy) \
            and self._p_randstainna == other._p_randstainna \
            and self._p_stain_sep == other._p_stain_sep

    def __hash__(self):
        return hash((self._p_randstainna, self._p_stain_sep))

    def __repr__(self):
        return f'MixturePolicy(p_randstainna={self._p_randstainna}, p_stain_sep={self._p_stain_sep})'
