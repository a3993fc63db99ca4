import csv
import logging
import os
import typing

from staintk.errors import ParseError, DuplicateIdError, MissingColumnError
from staintk.util import looks_like_url, open_text_io_handle_for_reading, open_text_io_handle_for_writing

logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = ('id', 'image_path', 'scanner')
"""
The columns every manifest must have.
"""

OPTIONAL_COLUMNS = ('mask_path', 'pred_path', 'fold')


class ManifestRow:
    """
    One image of a dataset.

    :param identifier: the unique id of the image.
    :param image_path: path to the image.
    :param scanner: the label of the scanner (or any other acquisition site) of the image.
    :param mask_path: path to the ground truth mask or `None`.
    :param pred_path: path to the predicted mask or `None`.
    :param fold: the cross-validation fold or `None` if the image was not assigned to a fold yet.
    :param labels: other columns of the manifest, e.g. the organ, by column name.
    """

    def __init__(self, identifier: str,
                 image_path: str,
                 scanner: str,
                 mask_path: typing.Optional[str] = None,
                 pred_path: typing.Optional[str] = None,
                 fold: typing.Optional[int] = None,
                 labels: typing.Optional[typing.Mapping[str, str]] = None):
        if not isinstance(identifier, str) or len(identifier) == 0:
            raise ValueError(f'identifier must be a non-empty `str` but was {identifier!r}')
        self._identifier = identifier
        self._image_path = image_path
        self._scanner = scanner
        self._mask_path = mask_path
        self._pred_path = pred_path
        self._fold = fold
        self._labels = dict(labels) if labels is not None else {}

    @property
    def identifier(self) -> str:
        return self._identifier

    @property
    def image_path(self) -> str:
        return self._image_path

    @property
    def scanner(self) -> str:
        return self._scanner

    @property
    def mask_path(self) -> typing.Optional[str]:
        return self._mask_path

    @property
    def pred_path(self) -> typing.Optional[str]:
        return self._pred_path

    @property
    def fold(self) -> typing.Optional[int]:
        return self._fold

    @property
    def labels(self) -> typing.Mapping[str, str]:
        return self._labels

    def label(self, column: str) -> str:
        """
        Get the value of a grouping column: `scanner`, `fold`, or any other column of the manifest.

        :raises MissingColumnError: if the row has no such column.
        """
        if column == 'scanner':
            return self._scanner
        if column == 'fold' and self._fold is not None:
            return str(self._fold)
        try:
            return self._labels[column]
        except KeyError:
            raise MissingColumnError(column)

    def groups(self) -> typing.Dict[str, str]:
        """
        Get the grouping labels of the row, including the scanner and, if assigned, the fold.
        """
        groups = {'scanner': self._scanner}
        if self._fold is not None:
            groups['fold'] = str(self._fold)
        groups.update(self._labels)
        return groups

    def __eq__(self, other):
        return isinstance(other, ManifestRow) \
            and self._identifier == other._identifier \
            and self._image_path == other._image_path \
            and self._scanner == other._scanner \
            and self._mask_path == other._mask_path \
            and self._pred_path == other._pred_path \
            and self._fold == other._fold \
            and self._labels == other._labels

    def __hash__(self):
        return hash((self._identifier, self._image_path, self._scanner, self._mask_path, self._pred_path, self._fold))

    def __repr__(self):
        return f'ManifestRow(identifier={self._identifier!r}, image_path={self._image_path!r}, ' \
               f'scanner={self._scanner!r}, mask_path={self._mask_path!r}, fold={self._fold})'


class Manifest(typing.Sequence[ManifestRow]):
    """
    An ordered sequence of :class:`ManifestRow` s with unique ids.

    :raises DuplicateIdError: if two rows share an id.
    """

    def __init__(self, rows: typing.Iterable[ManifestRow]):
        self._rows = tuple(rows)
        self._by_id = {}
        for row in self._rows:
            if row.identifier in self._by_id:
                raise DuplicateIdError(row.identifier)
            self._by_id[row.identifier] = row

    def ids(self) -> typing.Sequence[str]:
        return tuple(row.identifier for row in self._rows)

    def get_row(self, identifier: str) -> typing.Optional[ManifestRow]:
        return self._by_id.get(identifier, None)

    def label_columns(self) -> typing.Sequence[str]:
        """
        Get the sorted names of the extra label columns.
        """
        return tuple(sorted({column for row in self._rows for column in row.labels}))

    def to_csv(self, fh: typing.Union[str, typing.IO]):
        """
        Write the manifest with all columns that are used by at least one row.
        """
        columns = list(REQUIRED_COLUMNS[:2]) + ['mask_path', 'scanner']
        if any(row.pred_path is not None for row in self._rows):
            columns.append('pred_path')
        if any(row.fold is not None for row in self._rows):
            columns.append('fold')
        columns.extend(self.label_columns())

        handle = open_text_io_handle_for_writing(fh)
        try:
            writer = csv.DictWriter(handle, fieldnames=columns, lineterminator='\n')
            writer.writeheader()
            for row in self._rows:
                record = {
                    'id': row.identifier,
                    'image_path': row.image_path,
                    'mask_path': row.mask_path or '',
                    'scanner': row.scanner,
                    'pred_path': row.pred_path or '',
                    'fold': '' if row.fold is None else row.fold,
                }
                record.update(row.labels)
                writer.writerow({column: record.get(column, '') for column in columns})
        finally:
            if handle is not fh:
                handle.close()

    def __getitem__(self, item):
        return self._rows[item]

    def __len__(self) -> int:
        return len(self._rows)

    def __iter__(self) -> typing.Iterator[ManifestRow]:
        return iter(self._rows)

    def __eq__(self, other):
        return isinstance(other, Manifest) and self._rows == other._rows

    def __hash__(self):
        return hash(self._rows)

    def __repr__(self):
        return f'Manifest(n_rows={len(self._rows)})'


def read_manifest(fh: typing.Union[str, os.PathLike, typing.IO]) -> Manifest:
    """
    Read a CSV manifest with the header `id,image_path,mask_path,scanner[,fold]`.

    The `mask_path`, `pred_path`, and `fold` columns are optional, as are their values. Any other column is kept
    as a label of the row. Relative paths are resolved against the directory of the manifest file.

    :param fh: a path to the manifest or an open text handle.
    :raises MissingColumnError: if a required column is missing in the header.
    :raises DuplicateIdError: if an id is used by more than one row.
    :raises ParseError: if a row is malformed.
    """
    base_dir = None
    if isinstance(fh, (str, os.PathLike)) and not looks_like_url(os.fspath(fh)):
        base_dir = os.path.dirname(os.path.abspath(os.fspath(fh)))

    rows = []
    seen = set()
    with open_text_io_handle_for_reading(fh, encoding='utf-8-sig') as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames
        if header is None:
            raise ParseError('Manifest is empty, expected a header', 1)
        for column in REQUIRED_COLUMNS:
            if column not in header:
                raise MissingColumnError(column, 1)
        label_columns = [c for c in header if c not in REQUIRED_COLUMNS and c not in OPTIONAL_COLUMNS]

        for record in reader:
            line = reader.line_num
            row = _parse_row(record, label_columns, base_dir, line)
            if row.identifier in seen:
                raise DuplicateIdError(row.identifier, line)
            seen.add(row.identifier)
            rows.append(row)

    logger.debug('Read manifest with %d rows', len(rows))
    return Manifest(rows)


def _parse_row(record: typing.Mapping[typing.Optional[str], typing.Any],
               label_columns: typing.Sequence[str],
               base_dir: typing.Optional[str],
               line: int) -> ManifestRow:
    if None in record:
        raise ParseError('Row has more fields than the header', line)
    if any(value is None for value in record.values()):
        raise ParseError('Row has fewer fields than the header', line)

    identifier = record['id'].strip()
    if len(identifier) == 0:
        raise ParseError('Row has an empty id', line)
    image_path = record['image_path'].strip()
    if len(image_path) == 0:
        raise ParseError(f'Row {identifier!r} has an empty image_path', line)

    fold = None
    fold_value = record.get('fold', '').strip()
    if fold_value:
        try:
            fold = int(fold_value)
        except ValueError:
            raise ParseError(f'Fold {fold_value!r} of row {identifier!r} is not an integer', line)
        if fold < 0:
            raise ParseError(f'Fold of row {identifier!r} must be non-negative but was {fold}', line)

    return ManifestRow(
        identifier=identifier,
        image_path=_resolve(image_path, base_dir),
        scanner=record['scanner'].strip(),
        mask_path=_resolve_optional(record.get('mask_path', ''), base_dir),
        pred_path=_resolve_optional(record.get('pred_path', ''), base_dir),
        fold=fold,
        labels={column: record[column].strip() for column in label_columns},
    )


def _resolve(path: str, base_dir: typing.Optional[str]) -> str:
    if base_dir is None or os.path.isabs(path):
        return path
    return os.path.join(base_dir, path)


def _resolve_optional(path: str, base_dir: typing.Optional[str]) -> typing.Optional[str]:
    path = path.strip()
    return _resolve(path, base_dir) if path else None
