"""
Stain toolkit is a library for separating, normalizing, and augmenting the stains of H&E histopathology images,
and for scoring tissue segmentation with the COSAS metric.
"""

__version__ = '0.1.0'

from . import augment
from . import color
from . import constants
from . import dataio
from . import errors
from . import metrics
from . import model
from . import mtl
from . import stainsep
from . import util

from .errors import InvalidInputError, InsufficientTissueError, FormatError, ParseError
from .model import RgbImage, OdImage, LabImage, StainMatrix, StainDensity, SegMask
from .color import rgb_to_od, od_to_rgb, rgb_to_lab, lab_to_rgb
from .stainsep import SeparationConfig, StainProfile, estimate_stains, fit_profile, normalize_spcn
from .augment import MixturePolicy, mixture_augment
from .metrics import dice, iou, cosas_score, tta_predict, evaluate_dataset
from .dataio import read_image, write_image, read_mask, write_mask, read_manifest, stratified_kfold
