import json
import typing

import numpy as np

from staintk.errors import InvalidInputError, ParseError
from staintk.util import validate_instance

PARAM_NAMES = ('a_h', 'b_h', 'a_w', 'b_w', 'a_c', 'b_c')
"""
Names of the parameter arrays of the toy model, in the serialization order.
"""


class ToyModelParams:
    """
    Parameters of the per-pixel multi-head model.

    The density head maps `d` features to `r` densities, the matrix head maps them to an `m × r` stain matrix,
    and the classification head maps the concatenated densities and stain matrix to a logit.

    >>> params = ToyModelParams.zeros(d=3, r=2)
    >>> params.shapes()['a_w'], params.shapes()['a_c']
    ((3, 6), (8,))

    :param a_h: the `(d, r)` weights of the density head.
    :param b_h: the `(r,)` bias of the density head.
    :param a_w: the `(d, m·r)` weights of the matrix head.
    :param b_w: the `(m·r,)` bias of the matrix head.
    :param a_c: the `(r + m·r,)` weights of the classification head.
    :param b_c: the bias of the classification head.
    """

    def __init__(self, a_h: np.ndarray,
                 b_h: np.ndarray,
                 a_w: np.ndarray,
                 b_w: np.ndarray,
                 a_c: np.ndarray,
                 b_c: float):
        a_h = np.array(a_h, dtype=float)
        if a_h.ndim != 2 or a_h.shape[0] < 1 or a_h.shape[1] < 1:
            raise InvalidInputError(f'a_h must be a (d, r) array with d, r ≥ 1 but had shape {a_h.shape}')
        d, r = a_h.shape
        b_w = np.array(b_w, dtype=float)
        if b_w.ndim != 1 or b_w.shape[0] < r or b_w.shape[0] % r != 0:
            raise InvalidInputError(f'b_w must have m·r values for r={r} but had shape {b_w.shape}')
        m = b_w.shape[0] // r

        arrays = {
            'a_h': a_h,
            'b_h': np.array(b_h, dtype=float),
            'a_w': np.array(a_w, dtype=float),
            'b_w': b_w,
            'a_c': np.array(a_c, dtype=float),
            'b_c': np.array(b_c, dtype=float).reshape(()),
        }
        expected = _shapes(d, r, m)
        for name in PARAM_NAMES:
            if arrays[name].shape != expected[name]:
                raise InvalidInputError(f'{name} must have shape {expected[name]} but had {arrays[name].shape}')
            if not np.all(np.isfinite(arrays[name])):
                raise InvalidInputError(f'{name} must be finite')
            arrays[name].setflags(write=False)

        self._d = d
        self._r = r
        self._m = m
        self._arrays = arrays

    @staticmethod
    def zeros(d: int, r: int, m: int = 3) -> 'ToyModelParams':
        return ToyModelParams.from_arrays({name: np.zeros(shape) for name, shape in _shapes(d, r, m).items()})

    @staticmethod
    def random(d: int, r: int, rng: np.random.Generator, m: int = 3, scale: float = .1) -> 'ToyModelParams':
        """
        Draw all parameters from :math:`N(0, scale^2)`.
        """
        return ToyModelParams.from_arrays({
            name: rng.normal(0., scale, size=shape)
            for name, shape in _shapes(d, r, m).items()
        })

    @staticmethod
    def from_arrays(arrays: typing.Mapping[str, np.ndarray]) -> 'ToyModelParams':
        return ToyModelParams(**{name: arrays[name] for name in PARAM_NAMES})

    @property
    def d(self) -> int:
        return self._d

    @property
    def r(self) -> int:
        return self._r

    @property
    def m(self) -> int:
        return self._m

    @property
    def a_h(self) -> np.ndarray:
        return self._arrays['a_h']

    @property
    def b_h(self) -> np.ndarray:
        return self._arrays['b_h']

    @property
    def a_w(self) -> np.ndarray:
        return self._arrays['a_w']

    @property
    def b_w(self) -> np.ndarray:
        return self._arrays['b_w']

    @property
    def a_c(self) -> np.ndarray:
        return self._arrays['a_c']

    @property
    def b_c(self) -> float:
        return float(self._arrays['b_c'])

    def arrays(self) -> typing.Mapping[str, np.ndarray]:
        """
        Get the read-only parameter arrays by name (`b_c` is a 0-dimensional array).
        """
        return dict(self._arrays)

    def shapes(self) -> typing.Mapping[str, typing.Tuple[int, ...]]:
        return _shapes(self._d, self._r, self._m)

    def n_params(self) -> int:
        return sum(arr.size for arr in self._arrays.values())

    def combine(self, other: 'ToyModelParams', factor: float) -> 'ToyModelParams':
        """
        Get the parameters `self + factor × other`, e.g. a gradient step with `factor = -lr`.
        """
        if self.shapes() != other.shapes():
            raise InvalidInputError('Cannot combine parameters of different shapes')
        return ToyModelParams.from_arrays({
            name: self._arrays[name] + factor * other._arrays[name] for name in PARAM_NAMES
        })

    def to_dict(self) -> typing.Dict[str, typing.Any]:
        data = {'d': self._d, 'r': self._r, 'm': self._m}
        for name in PARAM_NAMES:
            data[name] = self._arrays[name].ravel().tolist()
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True) + '\n'

    @staticmethod
    def from_dict(data: typing.Mapping[str, typing.Any]) -> 'ToyModelParams':
        try:
            d, r, m = int(data['d']), int(data['r']), int(data['m'])
            shapes = _shapes(d, r, m)
            arrays = {name: np.array(data[name], dtype=float).reshape(shapes[name]) for name in PARAM_NAMES}
        except KeyError as ke:
            raise ParseError(f'Model parameters are missing field {ke.args[0]!r}')
        except (TypeError, ValueError) as e:
            raise ParseError(f'Malformed model parameters: {e}')
        return ToyModelParams.from_arrays(arrays)

    @staticmethod
    def from_json(text: str) -> 'ToyModelParams':
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(f'Model parameters are not valid JSON: {e.msg}', e.lineno)
        if not isinstance(data, dict):
            raise ParseError('Model parameters must be a JSON object')
        return ToyModelParams.from_dict(data)

    def __eq__(self, other):
        return isinstance(other, ToyModelParams) \
            and self.shapes() == other.shapes() \
            and all(np.array_equal(self._arrays[name], other._arrays[name]) for name in PARAM_NAMES)

    def __hash__(self):
        return hash(tuple(self._arrays[name].tobytes() for name in PARAM_NAMES))

    def __repr__(self):
        return f'ToyModelParams(d={self._d}, r={self._r}, m={self._m})'


class PixelBatch:
    """
    Per-pixel inputs and targets of the toy model.

    :param features: an `(n, d)` array of pixel features.
    :param od_target: an `(n, m)` array with the non-negative optical density of the pixels.
    :param labels: `n` binary labels.
    """

    def __init__(self, features: np.ndarray, od_target: np.ndarray, labels: np.ndarray):
        features = np.array(features, dtype=float)
        od_target = np.array(od_target, dtype=float)
        labels = np.array(labels)
        if features.ndim != 2 or features.shape[0] < 1:
            raise InvalidInputError(f'features must be a non-empty (n, d) array but had shape {features.shape}')
        n = features.shape[0]
        if od_target.ndim != 2 or od_target.shape[0] != n:
            raise InvalidInputError(f'od_target must be an ({n}, m) array but had shape {od_target.shape}')
        if labels.shape != (n,):
            raise InvalidInputError(f'labels must have shape ({n},) but had {labels.shape}')
        if not np.all(np.isfinite(features)) or not np.all(np.isfinite(od_target)):
            raise InvalidInputError('features and od_target must be finite')
        if np.any(od_target < 0.):
            raise InvalidInputError('od_target must be non-negative')
        if not np.all((labels == 0) | (labels == 1)):
            raise InvalidInputError('labels must be binary')

        self._features = features
        self._od_target = od_target
        self._labels = labels.astype(float)
        for arr in (self._features, self._od_target, self._labels):
            arr.setflags(write=False)

    @property
    def features(self) -> np.ndarray:
        return self._features

    @property
    def od_target(self) -> np.ndarray:
        return self._od_target

    @property
    def labels(self) -> np.ndarray:
        """
        Get the labels as a `float` array of zeros and ones.
        """
        return self._labels

    @property
    def n(self) -> int:
        return self._features.shape[0]

    @property
    def d(self) -> int:
        return self._features.shape[1]

    @property
    def m(self) -> int:
        return self._od_target.shape[1]

    def take(self, idx: np.ndarray) -> 'PixelBatch':
        """
        Get a batch with the pixels at `idx`.
        """
        return PixelBatch(self._features[idx], self._od_target[idx], self._labels[idx])

    def __repr__(self):
        return f'PixelBatch(n={self.n}, d={self.d}, m={self.m})'


class ForwardResult:
    """
    Outputs of the toy model for a batch of `n` pixels.
    """

    def __init__(self, h_hat: np.ndarray, w_hat: np.ndarray, logits: np.ndarray, recon: np.ndarray):
        self._h_hat = h_hat
        self._w_hat = w_hat
        self._logits = logits
        self._recon = recon

    @property
    def h_hat(self) -> np.ndarray:
        """
        Get the `(n, r)` predicted densities.
        """
        return self._h_hat

    @property
    def w_hat(self) -> np.ndarray:
        """
        Get the `(n, m, r)` predicted per-pixel stain matrices.
        """
        return self._w_hat

    @property
    def logits(self) -> np.ndarray:
        return self._logits

    @property
    def recon(self) -> np.ndarray:
        """
        Get the `(n, m)` reconstructed optical density, the product of the stain matrix and the density per pixel.
        """
        return self._recon

    def __repr__(self):
        return f'ForwardResult(n={self._logits.shape[0]})'


def softplus(z: np.ndarray) -> np.ndarray:
    """
    Compute :math:`\\ln(1 + e^z)` without overflow.
    """
    return np.logaddexp(0., z)


def sigmoid(z: np.ndarray) -> np.ndarray:
    """
    Compute :math:`1 / (1 + e^{-z})` without overflow.
    """
    return np.exp(-np.logaddexp(0., -z))


def forward(params: ToyModelParams, batch: PixelBatch) -> ForwardResult:
    """
    Run the toy model on the pixels of the `batch`.

    :raises InvalidInputError: if the feature or channel counts of the batch and the model disagree.
    """
    params = validate_instance(params, ToyModelParams, 'params')
    batch = validate_instance(batch, PixelBatch, 'batch')
    _check_compatible(params, batch)
    h_hat, w_flat, logits, recon = _forward_arrays(params.arrays(), batch.features, params.m, params.r)
    return ForwardResult(h_hat, w_flat.reshape(batch.n, params.m, params.r), logits, recon)


def _forward_arrays(arrays: typing.Mapping[str, np.ndarray], x: np.ndarray, m: int, r: int):
    h_hat = softplus(x @ arrays['a_h'] + arrays['b_h'])
    w_flat = softplus(x @ arrays['a_w'] + arrays['b_w'])
    logits = np.concatenate([h_hat, w_flat], axis=1) @ arrays['a_c'] + arrays['b_c']
    recon = np.einsum('nmr,nr->nm', w_flat.reshape(x.shape[0], m, r), h_hat)
    return h_hat, w_flat, logits, recon


def _check_compatible(params: ToyModelParams, batch: PixelBatch):
    if params.d != batch.d:
        raise InvalidInputError(f'Model expects {params.d} features but the batch has {batch.d}')
    if params.m != batch.m:
        raise InvalidInputError(f'Model reconstructs {params.m} channels but the batch has {batch.m}')


def _shapes(d: int, r: int, m: int) -> typing.Dict[str, typing.Tuple[int, ...]]:
    if d < 1 or r < 1 or m < 1:
        raise InvalidInputError(f'd, r, and m must be positive but were {d}, {r}, {m}')
    return {
        'a_h': (d, r),
        'b_h': (r,),
        'a_w': (d, m * r),
        'b_w': (m * r,),
        'a_c': (r + m * r,),
        'b_c': (),
    }
