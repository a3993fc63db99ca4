import typing

import numpy as np

RngState = np.random.Generator
"""
The random state consumed by all stochastic functions of the toolkit.
"""


def make_rng(seed: int, *spawn_key: int) -> np.random.Generator:
    """
    Create a generator backed by the counter-based `Philox` bit generator.

    Generators created with the same `seed` but different `spawn_key`\\ s produce independent streams.
    Hence, a stream for the `i`-th manifest row is `make_rng(seed, i)` regardless of the order
    in which the rows are processed.

    >>> a = make_rng(42, 3).random()
    >>> b = make_rng(42, 3).random()
    >>> a == b
    True

    :param seed: the root seed, a non-negative `int`.
    :param spawn_key: zero or more non-negative `int`\\ s identifying a sub-stream.
    :return: a new :class:`numpy.random.Generator`.
    """
    return np.random.Generator(np.random.Philox(_seed_sequence(seed, spawn_key)))


def derive_seed(seed: int, *spawn_key: int) -> int:
    """
    Derive a 64-bit integer seed of the sub-stream identified by `spawn_key`.

    The value is suitable for recording in provenance logs and for seeding a new generator with :func:`make_rng`.
    """
    state = _seed_sequence(seed, spawn_key).generate_state(1, dtype=np.uint64)
    return int(state[0])


def _seed_sequence(seed: int, spawn_key: typing.Sequence[int]) -> np.random.SeedSequence:
    if not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ValueError(f'seed must be a non-negative `int` but was {seed!r}')
    return np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in spawn_key))
