"""Counter-based pseudo-random streams.

Every random quantity in the package is a pure function of a 64-bit key and
a counter, so results never depend on call order or scheduling.

Algorithm (SplitMix64, Steele/Lea/Flood 2014)::

    GAMMA = 0x9E3779B97F4A7C15
    mix(z):  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
             z = (z ^ (z >> 27)) * 0x94D049BB133111EB
             return z ^ (z >> 31)
    word(key, i) = mix(key + (i + 1) * GAMMA)        (all mod 2**64)

``word(key, i)`` is exactly the i-th output of a SplitMix64 generator seeded
with ``key``. Derived quantities:

* sign:     +1 if the top bit of the word is 0, else -1
* uniform:  (word >> 11) * 2**-53, in [0, 1)
* normal:   Box-Muller on uniforms (2i, 2i+1): sqrt(-2 ln(1-u1)) cos(2 pi u2)

Child keys are ``derive_seed(master, index, role)``::

    mix(mix(master ^ fnv1a64(role)) + (index + 1) * GAMMA)

where ``fnv1a64`` is the 64-bit FNV-1a hash of the UTF-8 role name.
"""

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def mix64(z):
    """SplitMix64 finalizer on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def fnv1a64(text):
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & MASK64
    return h


def derive_seed(master, index, role):
    """Child key for stream ``(master, index, role)``."""
    z = mix64((int(master) & MASK64) ^ fnv1a64(role))
    return mix64(z + (int(index) + 1) * GAMMA)


def _mix_array(z):
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(_M1)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def words(keys, count, offset=0):
    """Raw 64-bit words.

    Parameters
    ----------
    keys : int or array_like of int
        One key, or an array of keys (one stream per key).
    count : int
        Number of words per stream.
    offset : int
        Counter of the first word.

    Returns
    -------
    ndarray of uint64, shape ``np.shape(keys) + (count,)``
    """
    keys = np.asarray(
        [int(k) & MASK64 for k in np.ravel(keys)], dtype=np.uint64
    ).reshape(np.shape(keys))
    counters = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = keys[..., None] + counters * np.uint64(GAMMA)
        return _mix_array(z)


def signs(key, n):
    """Rademacher vector of length ``n`` (float64 entries in {+1, -1})."""
    w = words(key, n)
    return 1.0 - 2.0 * (w >> np.uint64(63)).astype(np.float64)


def uniforms(keys, count, offset=0):
    w = words(keys, count, offset)
    return (w >> np.uint64(11)).astype(np.float64) * 2.0**-53


def normals(keys, count, offset=0):
    u = uniforms(keys, 2 * count, 2 * offset)
    u1, u2 = u[..., 0::2], u[..., 1::2]
    return np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)


def random_subsets(keys, n, s):
    """One uniformly random ``s``-subset of ``range(n)`` per key, sorted.

    Each index gets a uniform score and the ``s`` smallest scores win, so
    every subset of size ``s`` is equally likely.
    """
    scores = uniforms(keys, n)
    if s == 0:
        return np.zeros(scores.shape[:-1] + (0,), dtype=np.intp)
    idx = np.argpartition(scores, s - 1, axis=-1)[..., :s]
    return np.sort(idx, axis=-1)
