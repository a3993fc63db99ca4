import json
import logging
import typing
from collections import defaultdict

from staintk.errors import InvalidInputError, ParseError
from staintk.util import make_rng, validate_instance

from ._manifest import Manifest

logger = logging.getLogger(__name__)


class FoldAssignment:
    """
    Assignment of image ids to `k` cross-validation folds.

    >>> folds = FoldAssignment(2, {'a': 0, 'b': 1, 'c': 0})
    >>> folds.fold_ids(0)
    ('a', 'c')

    :param k: the number of folds.
    :param assignments: mapping from an image id to its fold in :math:`[0, k)`.
    """

    def __init__(self, k: int, assignments: typing.Mapping[str, int]):
        if not isinstance(k, int) or k < 2:
            raise InvalidInputError(f'k must be an `int` ≥ 2 but was {k!r}')
        for identifier, fold in assignments.items():
            if not isinstance(fold, int) or not 0 <= fold < k:
                raise InvalidInputError(f'Fold of {identifier!r} must be in [0, {k}) but was {fold!r}')
        self._k = k
        self._assignments = dict(assignments)

    @property
    def k(self) -> int:
        return self._k

    @property
    def assignments(self) -> typing.Mapping[str, int]:
        return self._assignments

    def fold_of(self, identifier: str) -> int:
        return self._assignments[identifier]

    def fold_ids(self, fold: int) -> typing.Sequence[str]:
        """
        Get the ids of a fold in the order of the assignment.
        """
        return tuple(identifier for identifier, f in self._assignments.items() if f == fold)

    def fold_sizes(self) -> typing.Sequence[int]:
        sizes = [0] * self._k
        for fold in self._assignments.values():
            sizes[fold] += 1
        return tuple(sizes)

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        return {'k': self._k, 'assignments': dict(self._assignments)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True) + '\n'

    @staticmethod
    def from_dict(data: typing.Mapping[str, typing.Any]) -> 'FoldAssignment':
        try:
            k = data['k']
            assignments = data['assignments']
        except KeyError as ke:
            raise ParseError(f'Fold assignment is missing field {ke.args[0]!r}')
        if not isinstance(assignments, dict):
            raise ParseError('Fold assignments must be a JSON object')
        return FoldAssignment(k, assignments)

    @staticmethod
    def from_json(text: str) -> 'FoldAssignment':
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(f'Fold assignment is not valid JSON: {e.msg}', e.lineno)
        if not isinstance(data, dict):
            raise ParseError('Fold assignment must be a JSON object')
        return FoldAssignment.from_dict(data)

    def __len__(self):
        return len(self._assignments)

    def __eq__(self, other):
        return isinstance(other, FoldAssignment) \
            and self._k == other._k \
            and self._assignments == other._assignments

    def __hash__(self):
        return hash((self._k, tuple(sorted(self._assignments.items()))))

    def __repr__(self):
        return f'FoldAssignment(k={self._k}, n={len(self._assignments)})'


def stratified_kfold(manifest: Manifest, k: int = 4, seed: int = 42, by: str = 'scanner') -> FoldAssignment:
    """
    Split the manifest rows into `k` folds stratified by a column.

    The strata are visited in sorted order. The rows of a stratum are shuffled and dealt round-robin into the folds,
    starting at the fold after the last one dealt by the previous stratum. Hence, the fold sizes differ by at most
    one within each stratum as well as overall.

    :param manifest: the rows to split.
    :param k: the number of folds, at least `2` and at most the number of rows.
    :param seed: the seed of the shuffles.
    :param by: the stratification column.
    :raises InvalidInputError: if `k` is out of range.
    :raises MissingColumnError: if a row lacks the stratification column.
    """
    manifest = validate_instance(manifest, Manifest, 'manifest')
    if not isinstance(k, int) or k < 2:
        raise InvalidInputError(f'k must be an `int` ≥ 2 but was {k!r}')
    if k > len(manifest):
        raise InvalidInputError(f'Cannot split {len(manifest)} rows into {k} folds')

    strata: typing.Dict[str, typing.List[str]] = defaultdict(list)
    for row in manifest:
        strata[row.label(by)].append(row.identifier)

    rng = make_rng(seed)
    folds = {}
    dealt = 0
    for stratum in sorted(strata):
        ids = strata[stratum]
        offset = dealt % k
        for i, idx in enumerate(rng.permutation(len(ids))):
            folds[ids[idx]] = int((offset + i) % k)
        dealt += len(ids)
        logger.debug('Dealt %d rows of stratum %r into %d folds', len(ids), stratum, k)

    return FoldAssignment(k, {identifier: folds[identifier] for identifier in manifest.ids()})
