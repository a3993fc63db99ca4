"""
The `staintk.model` package provides the data types shared by the toolkit.
"""

from ._image import RgbImage, OdImage, LabImage, ChannelStats
from ._mask import SegMask
from ._stain import StainMatrix, StainDensity, normalize_columns

__all__ = [
    'RgbImage', 'OdImage', 'LabImage', 'ChannelStats',
    'SegMask',
    'StainMatrix', 'StainDensity', 'normalize_columns',
]
