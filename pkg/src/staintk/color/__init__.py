"""
The `staintk.color` package provides the color-space transforms: RGB to/from optical density (Beer-Lambert law)
and RGB to/from CIELAB, along with the channel statistics.
"""

from ._od import rgb_to_od, od_to_rgb, od_values_to_rgb_array
from ._lab import rgb_to_lab, lab_to_rgb, lab_values_to_rgb_array, channel_stats

__all__ = [
    'rgb_to_od', 'od_to_rgb', 'od_values_to_rgb_array',
    'rgb_to_lab', 'lab_to_rgb', 'lab_values_to_rgb_array', 'channel_stats',
]
