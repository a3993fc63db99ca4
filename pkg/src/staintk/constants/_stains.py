import numpy as np


def _unit(*values: float) -> np.ndarray:
    v = np.array(values, dtype=float)
    v = v / np.linalg.norm(v)
    v.setflags(write=False)
    return v


HEMATOXYLIN = _unit(0.65, 0.70, 0.29)
"""
Unit OD vector of hematoxylin (RGB channel order).
"""

EOSIN = _unit(0.07, 0.99, 0.11)
"""
Unit OD vector of eosin (RGB channel order).
"""

DAB = _unit(0.27, 0.57, 0.78)
"""
Unit OD vector of diaminobenzidine (RGB channel order). Serves as the third reference stain.
"""

REFERENCE_STAINS = (HEMATOXYLIN, EOSIN, DAB)
"""
Reference stains in the canonical order, hematoxylin first.
"""
