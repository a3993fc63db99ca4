import concurrent.futures
import csv
import json
import logging
import typing

import numpy as np

from staintk.errors import InvalidInputError
from staintk.model import SegMask
from staintk.util import open_text_io_handle_for_writing

from ._scores import dice, iou, cosas_score

logger = logging.getLogger(__name__)

METRICS = ('dice', 'iou', 'cosas')


class EvaluationPair:
    """
    A predicted and a ground-truth mask of an image, along with the group labels of the image (e.g. scanner, fold).
    """

    def __init__(self, identifier: str,
                 pred: SegMask,
                 gt: SegMask,
                 groups: typing.Optional[typing.Mapping[str, str]] = None):
        self._identifier = str(identifier)
        self._pred = pred
        self._gt = gt
        self._groups = {} if groups is None else {str(k): str(v) for k, v in groups.items()}

    @property
    def identifier(self) -> str:
        return self._identifier

    @property
    def pred(self) -> SegMask:
        return self._pred

    @property
    def gt(self) -> SegMask:
        return self._gt

    @property
    def groups(self) -> typing.Mapping[str, str]:
        return self._groups

    def __repr__(self):
        return f'EvaluationPair(identifier={self._identifier!r}, groups={self._groups})'


class ImageScores:
    """
    Scores of a single image. The scores are `None` if the image could not be scored and `error` says why.
    """

    def __init__(self, identifier: str,
                 dice_score: typing.Optional[float],
                 iou_score: typing.Optional[float],
                 cosas: typing.Optional[float],
                 both_empty: bool = False,
                 groups: typing.Optional[typing.Mapping[str, str]] = None,
                 error: typing.Optional[str] = None):
        self._identifier = identifier
        self._dice = dice_score
        self._iou = iou_score
        self._cosas = cosas
        self._both_empty = both_empty
        self._groups = {} if groups is None else dict(groups)
        self._error = error

    @property
    def identifier(self) -> str:
        return self._identifier

    @property
    def dice(self) -> typing.Optional[float]:
        return self._dice

    @property
    def iou(self) -> typing.Optional[float]:
        return self._iou

    @property
    def cosas(self) -> typing.Optional[float]:
        return self._cosas

    @property
    def both_empty(self) -> bool:
        """
        `True` if both the prediction and the ground truth are empty, hence the scores are `1` by convention.
        """
        return self._both_empty

    @property
    def groups(self) -> typing.Mapping[str, str]:
        return self._groups

    @property
    def error(self) -> typing.Optional[str]:
        return self._error

    @property
    def is_valid(self) -> bool:
        return self._error is None

    def score(self, metric: str) -> typing.Optional[float]:
        return {'dice': self._dice, 'iou': self._iou, 'cosas': self._cosas}[metric]

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        return {
            'id': self._identifier,
            'dice': self._dice,
            'iou': self._iou,
            'cosas': self._cosas,
            'both_empty': self._both_empty,
            'groups': self._groups,
            'error': self._error,
        }

    def __repr__(self):
        return f'ImageScores(identifier={self._identifier!r}, dice={self._dice}, iou={self._iou}, ' \
               f'cosas={self._cosas}, error={self._error!r})'


class Aggregate:
    """
    Unweighted mean and population standard deviation of the per-image scores.
    """

    def __init__(self, n_images: int,
                 mean: typing.Mapping[str, typing.Optional[float]],
                 std: typing.Mapping[str, typing.Optional[float]]):
        self._n_images = n_images
        self._mean = dict(mean)
        self._std = dict(std)

    @staticmethod
    def of(rows: typing.Sequence[ImageScores]) -> 'Aggregate':
        valid = [row for row in rows if row.is_valid]
        mean = {}
        std = {}
        for metric in METRICS:
            if valid:
                values = np.array([row.score(metric) for row in valid])
                mean[metric] = float(np.mean(values))
                std[metric] = float(np.std(values))
            else:
                mean[metric] = None
                std[metric] = None
        return Aggregate(len(valid), mean, std)

    @property
    def n_images(self) -> int:
        return self._n_images

    @property
    def mean(self) -> typing.Mapping[str, typing.Optional[float]]:
        return self._mean

    @property
    def std(self) -> typing.Mapping[str, typing.Optional[float]]:
        return self._std

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        return {'n_images': self._n_images, 'mean': self._mean, 'std': self._std}

    def __repr__(self):
        return f'Aggregate(n_images={self._n_images}, mean={self._mean}, std={self._std})'


class MetricsReport:
    """
    Per-image scores and their aggregates, overall and per group.
    """

    def __init__(self, rows: typing.Sequence[ImageScores]):
        self._rows = tuple(rows)
        self._overall = Aggregate.of(self._rows)
        self._groups = self._aggregate_groups(self._rows)

    @staticmethod
    def _aggregate_groups(rows: typing.Sequence[ImageScores]) -> typing.Mapping[str, typing.Mapping[str, Aggregate]]:
        by_key: typing.Dict[str, typing.Dict[str, typing.List[ImageScores]]] = {}
        for row in rows:
            for key, value in row.groups.items():
                by_key.setdefault(key, {}).setdefault(value, []).append(row)
        return {
            key: {value: Aggregate.of(members) for value, members in sorted(values.items())}
            for key, values in sorted(by_key.items())
        }

    @property
    def rows(self) -> typing.Sequence[ImageScores]:
        return self._rows

    @property
    def overall(self) -> Aggregate:
        return self._overall

    @property
    def groups(self) -> typing.Mapping[str, typing.Mapping[str, Aggregate]]:
        """
        Get the aggregates by group key (e.g. `scanner`) and group value.
        """
        return self._groups

    def group_keys(self) -> typing.Sequence[str]:
        return tuple(self._groups.keys())

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        return {
            'images': [row.to_dict() for row in self._rows],
            'overall': self._overall.to_dict(),
            'groups': {
                key: {value: agg.to_dict() for value, agg in values.items()}
                for key, values in self._groups.items()
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True) + '\n'

    def to_csv(self, fh: typing.Union[str, typing.IO]):
        """
        Write one row per image followed by the `__mean__` and `__std__` rows of the overall aggregate.

        :param fh: a path or a writable text handle.
        """
        header = ['id', *METRICS, 'both_empty', *self.group_keys(), 'error']
        handle = open_text_io_handle_for_writing(fh)
        try:
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(header)
            for row in self._rows:
                writer.writerow([
                    row.identifier,
                    *(_fmt(row.score(metric)) for metric in METRICS),
                    str(row.both_empty).lower(),
                    *(row.groups.get(key, '') for key in self.group_keys()),
                    '' if row.error is None else row.error,
                ])
            n_tail = len(header) - 1 - len(METRICS)
            writer.writerow(['__mean__', *(_fmt(self._overall.mean[m]) for m in METRICS), *([''] * n_tail)])
            writer.writerow(['__std__', *(_fmt(self._overall.std[m]) for m in METRICS), *([''] * n_tail)])
        finally:
            if handle is not fh:
                handle.close()

    def __repr__(self):
        return f'MetricsReport(n_rows={len(self._rows)}, overall={self._overall!r})'


def score_pair(pair: EvaluationPair) -> ImageScores:
    """
    Score a single pair, recording a dimension mismatch as an error row.
    """
    try:
        d = dice(pair.pred, pair.gt)
        i = iou(pair.pred, pair.gt)
    except InvalidInputError as e:
        logger.warning('Cannot score %s: %s', pair.identifier, e)
        return ImageScores(pair.identifier, None, None, None, groups=pair.groups, error=str(e))
    both_empty = pair.pred.is_empty() and pair.gt.is_empty()
    return ImageScores(pair.identifier, d, i, cosas_score(d, i), both_empty=both_empty, groups=pair.groups)


def evaluate_dataset(pairs: typing.Sequence[EvaluationPair], n_threads: int = 1) -> MetricsReport:
    """
    Score all pairs and aggregate the scores overall and per group.

    The rows keep the order of the `pairs` regardless of the number of threads.

    :param pairs: one or more evaluation pairs.
    :param n_threads: the number of worker threads.
    :raises InvalidInputError: if there are no pairs.
    """
    pairs = list(pairs)
    if len(pairs) == 0:
        raise InvalidInputError('Cannot evaluate an empty dataset')
    if n_threads < 1:
        raise InvalidInputError(f'n_threads must be positive but was {n_threads}')

    if n_threads == 1:
        rows = [score_pair(pair) for pair in pairs]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=n_threads) as executor:
            rows = list(executor.map(score_pair, pairs))

    n_errors = sum(1 for row in rows if not row.is_valid)
    if n_errors:
        logger.warning('%d of %d pairs could not be scored', n_errors, len(rows))
    return MetricsReport(rows)


def _fmt(value: typing.Optional[float]) -> str:
    return '' if value is None else repr(float(value))
