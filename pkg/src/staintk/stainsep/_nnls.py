import itertools
import typing

import numpy as np

from staintk.errors import InvalidInputError


def nonnegative_projection(w: np.ndarray, x: np.ndarray, l1: float = 0.) -> np.ndarray:
    """
    Solve :math:`\\min_{h \\geq 0} \\|x - W h\\|^2 + l_1 \\sum h` exactly for every column of `x`.

    The problem is a small convex QP per pixel (`r ≤ 3`). We enumerate the candidate supports,
    solve the stationarity equations on each support, and keep the feasible candidate with the lowest objective.
    The optimum is among the candidates, hence the solution is exact up to rounding.

    >>> import numpy as np
    >>> w = np.array([[1., 0.], [0., 1.], [0., 0.]])
    >>> nonnegative_projection(w, np.array([[2.], [-1.], [5.]])).ravel().tolist()
    [2.0, 0.0]

    :param w: an `(m, r)` non-negative matrix.
    :param x: an `(m, n)` matrix with one pixel per column.
    :param l1: the weight of the L1 penalty.
    :return: an `(r, n)` non-negative matrix.
    """
    w = np.asarray(w, dtype=float)
    x = np.asarray(x, dtype=float)
    if w.ndim != 2 or x.ndim != 2 or w.shape[0] != x.shape[0]:
        raise InvalidInputError(f'Cannot project {x.shape} onto {w.shape}')
    if l1 < 0.:
        raise InvalidInputError(f'l1 must be non-negative but was {l1}')

    r = w.shape[1]
    n = x.shape[1]
    best_h = np.zeros((r, n))
    # The empty support.
    best_obj = np.einsum('ij,ij->j', x, x)

    for support in _supports(r):
        ws = w[:, support]
        gram = ws.T @ ws
        rhs = ws.T @ x - l1 / 2.
        hs = np.linalg.pinv(gram) @ rhs
        feasible = np.all(hs >= 0., axis=0)
        if not np.any(feasible):
            continue
        residual = x - ws @ hs
        obj = np.einsum('ij,ij->j', residual, residual) + l1 * hs.sum(axis=0)
        better = feasible & (obj < best_obj)
        if np.any(better):
            best_obj = np.where(better, obj, best_obj)
            candidate = np.zeros((r, n))
            candidate[list(support), :] = hs
            best_h[:, better] = candidate[:, better]

    return best_h


def _supports(r: int) -> typing.Iterator[typing.Tuple[int, ...]]:
    # Smaller supports first, so that ties keep the sparser solution.
    for size in range(1, r + 1):
        yield from itertools.combinations(range(r), size)
