"""
The `staintk.util` package provides the IO, logging, validation, and randomness helpers shared by the toolkit.
"""

from ._io import looks_like_url, looks_gzipped
from ._io import open_text_io_handle_for_reading, open_text_io_handle_for_writing
from ._log import setup_logging, parse_log_level, DEFAULT_LOG_FMT, LOG_LEVELS
from ._rng import RngState, make_rng, derive_seed
from ._validate import validate_instance, validate_optional_instance, validate_probability, validate_finite_array

__all__ = [
    'looks_like_url', 'looks_gzipped',
    'open_text_io_handle_for_reading', 'open_text_io_handle_for_writing',
    'setup_logging', 'parse_log_level', 'DEFAULT_LOG_FMT', 'LOG_LEVELS',
    'RngState', 'make_rng', 'derive_seed',
    'validate_instance', 'validate_optional_instance', 'validate_probability', 'validate_finite_array',
]
