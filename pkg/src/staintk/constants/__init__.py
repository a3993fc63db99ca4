"""
Reference optical-density vectors of common histology stains.
"""

from ._stains import HEMATOXYLIN, EOSIN, DAB, REFERENCE_STAINS

__all__ = ['HEMATOXYLIN', 'EOSIN', 'DAB', 'REFERENCE_STAINS']
