"""Unitary radix-2 fast transforms.

Three kernels share one calling convention: they act along the last axis of
an array, so a batch of vectors is a 2-D array with one vector per row.

=========  ======================================  =====  ==============
kind       matrix entry H[i, j]                     K      adjoint
=========  ======================================  =====  ==============
wht        (-1)**popcount(i & j) / sqrt(n)          1      itself
dft        exp(-2 pi i ij / n) / sqrt(n)            1      conjugate DFT
dct2       c_i cos(pi (2j + 1) i / 2n)              sqrt2  DCT-III
=========  ======================================  =====  ==============

with ``c_0 = sqrt(1/n)`` and ``c_i = sqrt(2/n)`` otherwise. All lengths
must be powers of two.

Operation counting: inside an :class:`OpCounter` block every kernel adds
one multiply-add per element per butterfly stage, i.e. ``n * log2(n)`` per
transformed vector. The global ``n**-1/2`` normalization is considered part
of the butterflies. The DCT pays ``n`` extra for its twiddle pass and runs
twice on complex input (real and imaginary parts).
"""

import contextvars
import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import FieldMismatch, LengthMismatch, NotPowerOfTwo, SizeGuard

MATERIALIZE_CAP = 4096

_active_counter = contextvars.ContextVar("fastrip_op_counter", default=None)


class OpCounter:
    """Context manager that accumulates multiply-adds done by the kernels.

    >>> with OpCounter() as c:
    ...     _ = apply_transform(FastTransformSpec("wht", 8), np.ones(8))
    >>> c.ops
    24
    """

    def __init__(self):
        self.ops = 0
        self._token = None

    def __enter__(self):
        self._token = _active_counter.set(self)
        return self

    def __exit__(self, *exc):
        _active_counter.reset(self._token)
        return False


def tally(ops):
    counter = _active_counter.get()
    if counter is not None:
        counter.ops += int(ops)


class TransformKind(str, enum.Enum):
    WALSH_HADAMARD = "wht"
    DFT = "dft"
    DCT2 = "dct2"


_ENTRY_BOUND = {
    TransformKind.WALSH_HADAMARD: 1.0,
    TransformKind.DFT: 1.0,
    TransformKind.DCT2: math.sqrt(2.0),
}


def is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class FastTransformSpec:
    """Which unitary transform ``H`` is in play.

    ``K`` and ``field`` are fixed by the kind: the max absolute entry of the
    matrix is ``K / sqrt(n)``; WHT and DCT-II keep real vectors real.
    """

    kind: TransformKind
    n: int

    def __post_init__(self):
        object.__setattr__(self, "kind", TransformKind(self.kind))
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"transform length must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if not is_power_of_two(self.n):
            raise NotPowerOfTwo(f"{self.kind.value} needs n = 2^l, got n = {self.n}")

    @property
    def K(self):
        return _ENTRY_BOUND[self.kind]

    @property
    def field(self):
        return "complex" if self.kind is TransformKind.DFT else "real"

    @property
    def log2n(self):
        return self.n.bit_length() - 1


# kernels ---------------------------------------------------------------------


def _wht(x):
    n = x.shape[-1]
    lead = x.shape[:-1]
    y = np.array(x, dtype=np.result_type(x, np.float64), copy=True)
    h = 1
    while h < n:
        v = y.reshape(lead + (n // (2 * h), 2, h))
        a = v[..., 0, :]
        b = v[..., 1, :]
        t = a - b
        a += b
        b[...] = t
        tally(y.size)
        h *= 2
    y *= 1.0 / math.sqrt(n)
    return y


@lru_cache(maxsize=None)
def _bit_reversal(n):
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


@lru_cache(maxsize=None)
def _twiddles(h, sign):
    return np.exp(sign * 1j * np.pi * np.arange(h) / h)


def _fft(x, sign=-1):
    """Unitary radix-2 decimation-in-time FFT; ``sign=+1`` gives the inverse."""
    n = x.shape[-1]
    lead = x.shape[:-1]
    y = np.asarray(x, dtype=np.complex128)[..., _bit_reversal(n)]
    h = 1
    while h < n:
        v = y.reshape(lead + (n // (2 * h), 2, h))
        a = v[..., 0, :]
        b = v[..., 1, :]
        b *= _twiddles(h, sign)
        t = a - b
        a += b
        b[...] = t
        tally(y.size)
        h *= 2
    y *= 1.0 / math.sqrt(n)
    return y


@lru_cache(maxsize=None)
def _dct_tables(n):
    k = np.arange(n)
    scale = np.full(n, math.sqrt(2.0 / n))
    scale[0] = math.sqrt(1.0 / n)
    # Makhoul reordering: even samples ascending, then odd samples descending
    order = np.concatenate((np.arange(0, n, 2), np.arange(n - 1, 0, -2)))
    inverse_order = np.argsort(order)
    phase = np.exp(-1j * np.pi * k / (2 * n))
    return scale, order, inverse_order, phase


def _dct2_real(x):
    n = x.shape[-1]
    scale, order, _, phase = _dct_tables(n)
    spectrum = _fft(x[..., order]) * math.sqrt(n)
    tally(x.size)
    return (phase * spectrum).real * scale


def _dct3_real(y):
    n = y.shape[-1]
    scale, _, inverse_order, phase = _dct_tables(n)
    c = y / scale
    mirrored = np.zeros_like(c)
    mirrored[..., 1:] = c[..., :0:-1]
    spectrum = np.conj(phase) * (c - 1j * mirrored)
    tally(y.size)
    v = _fft(spectrum, sign=+1).real * math.sqrt(n) / n
    return v[..., inverse_order]


def _real_split(kernel, x):
    if np.iscomplexobj(x):
        return kernel(x.real) + 1j * kernel(x.imag)
    return kernel(np.asarray(x, dtype=np.float64))


def apply_transform(spec, x, direction="forward", field=None):
    """Compute ``H x`` or ``H^* x`` along the last axis of ``x``.

    Parameters
    ----------
    spec : FastTransformSpec
    x : array_like, shape (..., n)
    direction : {"forward", "adjoint"}
    field : {"real", "complex"}, optional
        When ``"real"``, complex input is rejected with ``FieldMismatch``.

    Returns
    -------
    ndarray
        Same shape as ``x``. Real for real input under WHT and DCT-II,
        complex under DFT.
    """
    x = np.asarray(x)
    if x.ndim == 0 or x.shape[-1] != spec.n:
        raise LengthMismatch(
            f"expected length {spec.n}, got shape {x.shape}"
        )
    if field == "real" and np.iscomplexobj(x):
        raise FieldMismatch("complex input given to a real pipeline")
    if direction not in ("forward", "adjoint"):
        raise ValueError(f"direction must be 'forward' or 'adjoint', got {direction!r}")
    kind = spec.kind
    if kind is TransformKind.WALSH_HADAMARD:
        return _wht(x)
    if kind is TransformKind.DFT:
        return _fft(x, sign=-1 if direction == "forward" else +1)
    kernel = _dct2_real if direction == "forward" else _dct3_real
    return _real_split(kernel, x)


def materialize_transform(spec):
    """Dense ``n x n`` matrix of ``H`` (column ``j`` is ``H e_j``)."""
    if spec.n > MATERIALIZE_CAP:
        raise SizeGuard(f"n = {spec.n} exceeds the materialization cap {MATERIALIZE_CAP}")
    return apply_transform(spec, np.eye(spec.n)).T.copy()
