"""Restricted isometry constants: exact enumeration and Monte-Carlo bounds.

Convention (non-squared norms): ``delta_s(A)`` is the smallest ``delta`` with

    (1 - delta) ||x|| <= ||A x|| <= (1 + delta) ||x||    for all s-sparse x,

so ``delta_s = max_T max(sigma_max(A_T) - 1, 1 - sigma_min(A_T))`` over
supports ``|T| = s``. Values above 1 are allowed. The squared convention
``max_T max(sigma_max^2 - 1, 1 - sigma_min^2)`` is reported alongside.
"""

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import rng
from .errors import DegenerateInput, TooManySupports
from .linalg import jacobi_eigvalsh
from .operators import OperatorChain, SupportSet, apply_chain, materialize_chain
from .transforms import MATERIALIZE_CAP

MAX_SUPPORTS = 10**6
RIP_CSV_COLUMNS = ("construction", "n", "k", "s", "method", "delta", "trials",
                   "seed", "wall_time_ms")


class RipMethod(str, enum.Enum):
    EXACT = "exact"
    MONTE_CARLO = "monte-carlo"


@dataclass(frozen=True, eq=False)
class RipEstimate:
    s: int
    delta: float
    method: RipMethod
    squared_delta: float
    witness_support: Optional[SupportSet] = None
    witness_vector: Optional[np.ndarray] = None
    trials: Optional[int] = None


def _supports(n, s):
    return np.array(list(itertools.combinations(range(n), s)), dtype=np.intp)


def exact_rip_constant(A, s, chunk=20000):
    """Exact ``delta_s`` of a dense ``k x n`` matrix by enumerating supports.

    Extremal singular values of every column submatrix come from Jacobi
    eigenvalues of the corresponding principal submatrix of ``A^* A``.
    """
    A = np.asarray(A)
    n = A.shape[1]
    if s < 1 or s > n:
        raise DegenerateInput(f"need 1 <= s <= n, got s = {s}, n = {n}")
    count = math.comb(n, s)
    if count > MAX_SUPPORTS:
        raise TooManySupports(f"C({n}, {s}) = {count} supports exceeds {MAX_SUPPORTS}")

    gram = A.conj().T @ A
    supports = _supports(n, s)
    best = -np.inf
    best_sq = -np.inf
    witness = None
    for start in range(0, count, chunk):
        T = supports[start:start + chunk]
        sub = gram[T[:, :, None], T[:, None, :]]
        eig = np.clip(jacobi_eigvalsh(sub), 0.0, None)
        lo, hi = eig[:, 0], eig[:, -1]
        dev = np.maximum(np.sqrt(hi) - 1.0, 1.0 - np.sqrt(lo))
        dev_sq = np.maximum(hi - 1.0, 1.0 - lo)
        j = int(np.argmax(dev))
        if dev[j] > best:
            best = float(dev[j])
            witness = T[j]
        best_sq = max(best_sq, float(dev_sq.max()))
    return RipEstimate(
        s=s, delta=best, method=RipMethod.EXACT, squared_delta=best_sq,
        witness_support=SupportSet(witness, n),
    )


def sample_sparse_unit_vectors(n, s, trial_indices, seed, complex_field=False):
    """Random ``s``-sparse unit vectors, one per trial index.

    Trial ``t`` uses the stream ``derive_seed(seed, t, "mc-trial")``: its
    first ``n`` uniforms pick the support (uniform over all ``C(n, s)``)
    and the following normals give coefficients, normalized onto the unit
    sphere of the support.

    Returns
    -------
    supports : ndarray of int, shape (trials, s)
    coeffs : ndarray, shape (trials, s)
    """
    keys = [rng.derive_seed(seed, int(t), "mc-trial") for t in trial_indices]
    supports = rng.random_subsets(keys, n, s)
    if complex_field:
        g = rng.normals(keys, 2 * s, offset=n)
        coeffs = g[:, :s] + 1j * g[:, s:]
    else:
        coeffs = rng.normals(keys, s, offset=n)
    coeffs /= np.linalg.norm(coeffs, axis=1, keepdims=True)
    return supports, coeffs


def _sparse_norms(A, chain, n, supports, coeffs):
    if A is not None:
        cols = A[:, supports]  # (k, b, s)
        y = np.einsum("kbs,bs->bk", cols, coeffs)
    else:
        x = np.zeros((supports.shape[0], n), dtype=coeffs.dtype)
        np.put_along_axis(x, supports, coeffs, axis=1)
        y = apply_chain(chain, x)
    return np.linalg.norm(y, axis=1)


def monte_carlo_rip(chain, s, trials, seed, batch=4096):
    """Lower bound on ``delta_s``: the worst ``| ||A x|| - 1 |`` over trials.

    ``chain`` is an ``OperatorChain`` or a dense ``k x n`` array. Chains with
    ``n`` up to the materialization cap are densified once; larger ones are
    applied to batches of sparse vectors through the fast path.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if isinstance(chain, OperatorChain):
        n = chain.n
        complex_field = chain.field == "complex"
        A = materialize_chain(chain) if n <= MATERIALIZE_CAP else None
    else:
        A = np.asarray(chain)
        n = A.shape[1]
        complex_field = np.iscomplexobj(A)
    if s < 1 or s > n:
        raise DegenerateInput(f"need 1 <= s <= n, got s = {s}, n = {n}")

    best, best_sq = -1.0, -1.0
    witness = None
    for start in range(0, trials, batch):
        idx = np.arange(start, min(trials, start + batch))
        supports, coeffs = sample_sparse_unit_vectors(n, s, idx, seed, complex_field)
        norms = _sparse_norms(A, chain, n, supports, coeffs)
        dev = np.abs(norms - 1.0)
        j = int(np.argmax(dev))
        if dev[j] > best:
            best = float(dev[j])
            witness = np.zeros(n, dtype=coeffs.dtype)
            witness[supports[j]] = coeffs[j]
        best_sq = max(best_sq, float(np.max(np.abs(norms**2 - 1.0))))
    return RipEstimate(
        s=s, delta=best, method=RipMethod.MONTE_CARLO, squared_delta=best_sq,
        witness_vector=witness, trials=trials,
    )
