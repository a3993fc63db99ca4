"""
The `staintk.dataio` package reads and writes the images, masks, and manifests of a dataset,
and splits the manifest into stratified cross-validation folds.

>>> import io
>>> manifest = read_manifest(io.StringIO('id,image_path,mask_path,scanner\\na,a.png,,s1\\nb,b.png,,s2\\n'))
>>> manifest.ids()
('a', 'b')
>>> stratified_kfold(manifest, k=2, seed=1).fold_sizes()
(1, 1)
"""

from ._image import read_image, write_image, write_gray_image, read_mask, write_mask, MASK_THRESHOLD
from ._manifest import ManifestRow, Manifest, read_manifest, REQUIRED_COLUMNS, OPTIONAL_COLUMNS
from ._folds import FoldAssignment, stratified_kfold

__all__ = [
    'read_image', 'write_image', 'write_gray_image', 'read_mask', 'write_mask', 'MASK_THRESHOLD',
    'ManifestRow', 'Manifest', 'read_manifest', 'REQUIRED_COLUMNS', 'OPTIONAL_COLUMNS',
    'FoldAssignment', 'stratified_kfold',
]
