import numpy as np

from staintk.color import od_values_to_rgb_array
from staintk.errors import InvalidInputError
from staintk.model import RgbImage, OdImage, StainMatrix, StainDensity
from staintk.util import validate_instance, validate_probability


class SyntheticPatch:
    """
    A patch rendered from known stains and densities.
    """

    def __init__(self, image: RgbImage, od: OdImage, stains: StainMatrix, density: StainDensity):
        self._image = image
        self._od = od
        self._stains = stains
        self._density = density

    @property
    def image(self) -> RgbImage:
        """
        Get the rendered 8-bit image.
        """
        return self._image

    @property
    def od(self) -> OdImage:
        """
        Get the exact optical density :math:`WH` before quantization.
        """
        return self._od

    @property
    def stains(self) -> StainMatrix:
        return self._stains

    @property
    def density(self) -> StainDensity:
        return self._density

    def __repr__(self):
        return f'SyntheticPatch(height={self._image.height}, width={self._image.width}, r={self._stains.r})'


def make_synthetic_patch(stains: StainMatrix,
                         height: int,
                         width: int,
                         rng: np.random.Generator,
                         min_density: float = .2,
                         max_density: float = 1.5,
                         background_fraction: float = .2,
                         pure_fraction: float = .4,
                         i0: float = 255.) -> SyntheticPatch:
    """
    Render a patch with a known stain matrix and density.

    Each pixel is background (zero density) with probability `background_fraction`, stained by a single
    randomly chosen stain with probability `pure_fraction`, and a mixture of all stains otherwise.
    The densities of the stained pixels are uniform in `[min_density, max_density]`.

    >>> import numpy as np
    >>> from staintk.constants import HEMATOXYLIN, EOSIN
    >>> from staintk.model import StainMatrix
    >>> patch = make_synthetic_patch(StainMatrix.from_columns([HEMATOXYLIN, EOSIN]), 8, 4, np.random.default_rng(1))
    >>> patch.image.data.shape, patch.density.values.shape
    ((8, 4, 3), (2, 32))
    """
    stains = validate_instance(stains, StainMatrix, 'stains')
    if stains.m != 3:
        raise InvalidInputError(f'Synthetic patches need 3 channels but the stains had {stains.m}')
    if height < 1 or width < 1:
        raise InvalidInputError(f'Patch must have at least one pixel but was {height}×{width}')
    if not 0. <= min_density <= max_density:
        raise InvalidInputError(f'Invalid density range [{min_density}, {max_density}]')
    validate_probability(background_fraction, 'background_fraction')
    validate_probability(pure_fraction, 'pure_fraction')
    if background_fraction + pure_fraction > 1.:
        raise InvalidInputError('background_fraction + pure_fraction must not exceed 1')

    r = stains.r
    n = height * width
    kind = rng.random(n)
    density = rng.uniform(min_density, max_density, size=(r, n))

    background = kind < background_fraction
    density[:, background] = 0.

    pure = (kind >= background_fraction) & (kind < background_fraction + pure_fraction)
    chosen = rng.integers(0, r, size=n)
    keep = np.arange(r)[:, None] == chosen[None, :]
    density[:, pure] = np.where(keep[:, pure], density[:, pure], 0.)

    od = stains.values @ density
    image = RgbImage(od_values_to_rgb_array(od, height, width, i0))
    return SyntheticPatch(image, OdImage(od, height, width), stains, StainDensity(density, height, width))
