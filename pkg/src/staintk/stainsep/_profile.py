import json
import logging
import typing

import numpy as np

from staintk.color import rgb_to_od
from staintk.errors import InvalidInputError, ParseError
from staintk.model import RgbImage, StainMatrix
from staintk.util import validate_instance

from ._config import SeparationConfig
from ._nmf import estimate_stains, density_percentile, canonical_order, project_density

logger = logging.getLogger(__name__)

DEFAULT_PERCENTILE = 99.


class StainProfile:
    """
    The stain matrix and the robust maximum densities of a target image, the reference for stain normalization.

    The profile is stored as JSON with fields `m`, `r`, `columns` (the stain matrix in column-major order),
    and `density_scale`:

    >>> import numpy as np
    >>> from staintk.model import StainMatrix
    >>> profile = StainProfile(StainMatrix(np.eye(3)[:, :2]), [1.5, .5])
    >>> print(profile.to_json(), end='')
    {"columns": [1.0, 0.0, 0.0, 0.0, 1.0, 0.0], "density_scale": [1.5, 0.5], "m": 3, "r": 2}

    :param stains: the stain matrix.
    :param density_scale: `r` positive density scales, one per stain.
    """

    def __init__(self, stains: StainMatrix, density_scale: typing.Sequence[float]):
        self._stains = validate_instance(stains, StainMatrix, 'stains')
        scale = np.array(density_scale, dtype=float)
        if scale.ndim != 1 or scale.shape[0] != self._stains.r:
            raise InvalidInputError(f'Expected {self._stains.r} density scales but got {scale.shape}')
        if not np.all(np.isfinite(scale)) or np.any(scale <= 0.):
            raise InvalidInputError(f'Density scales must be positive but were {scale.tolist()}')
        scale.setflags(write=False)
        self._density_scale = scale

    @property
    def stains(self) -> StainMatrix:
        return self._stains

    @property
    def density_scale(self) -> np.ndarray:
        return self._density_scale

    @property
    def r(self) -> int:
        return self._stains.r

    def canonical(self) -> 'StainProfile':
        """
        Get the profile with the stains in the canonical order, keeping each scale with its stain.
        """
        order = canonical_order(self._stains.values)
        return StainProfile(self._stains.permute(order), self._density_scale[order])

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        return {
            'm': self._stains.m,
            'r': self._stains.r,
            'columns': self._stains.values.T.ravel().tolist(),
            'density_scale': self._density_scale.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True) + '\n'

    @staticmethod
    def from_dict(data: typing.Mapping[str, typing.Any]) -> 'StainProfile':
        try:
            m = int(data['m'])
            r = int(data['r'])
            columns = np.array(data['columns'], dtype=float)
            scale = data['density_scale']
        except KeyError as ke:
            raise ParseError(f'Stain profile is missing field {ke.args[0]!r}')
        except (TypeError, ValueError) as e:
            raise ParseError(f'Malformed stain profile: {e}')
        if columns.shape != (m * r,):
            raise ParseError(f'Expected {m * r} column values but got {columns.size}')
        return StainProfile(StainMatrix(columns.reshape(r, m).T), scale)

    @staticmethod
    def from_json(text: str) -> 'StainProfile':
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(f'Stain profile is not valid JSON: {e.msg}', e.lineno)
        if not isinstance(data, dict):
            raise ParseError('Stain profile must be a JSON object')
        return StainProfile.from_dict(data)

    def __eq__(self, other):
        return isinstance(other, StainProfile) \
            and self._stains == other._stains \
            and np.array_equal(self._density_scale, other._density_scale)

    def __hash__(self):
        return hash((self._stains, self._density_scale.tobytes()))

    def __repr__(self):
        return f'StainProfile(stains={self._stains!r}, density_scale={self._density_scale.tolist()})'


def fit_profile(img: RgbImage,
                cfg: typing.Optional[SeparationConfig] = None,
                percentile: float = DEFAULT_PERCENTILE) -> StainProfile:
    """
    Separate the stains of `img` and summarize them into a :class:`StainProfile`.

    :param img: the target image.
    :param cfg: the separation parameters or `None` for the defaults.
    :param percentile: the percentile of the densities used as the scale of each stain.
    :raises InsufficientTissueError: if the image has too little tissue.
    :raises InvalidInputError: if a stain is absent from the image (zero scale).
    """
    img = validate_instance(img, RgbImage, 'img')
    cfg = SeparationConfig() if cfg is None else cfg
    od = rgb_to_od(img, cfg.i0)
    separation = estimate_stains(od, cfg)
    scale = density_percentile(project_density(separation.stains, od), percentile)
    if np.any(scale <= 0.):
        raise InvalidInputError(f'Stain absent from the target image, density scales were {scale.tolist()}')
    logger.debug('Fitted profile with density scales %s', scale.tolist())
    return StainProfile(separation.stains, scale)
