"""Sparse recovery through the fast operator.

Both solvers touch the operator only through ``apply_chain``; OMP also
builds the columns it selects, one ``apply_chain(chain, e_j)`` at a time.
"""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import rng
from .errors import LengthMismatch, SingularSubproblem
from .operators import ChainSpec, apply_chain

SUCCESS_TOL = 1e-6
RECOVERY_CSV_COLUMNS = ("algorithm", "n", "k", "s", "seed", "success", "iters", "rel_error")


@dataclass(frozen=True, eq=False)
class RecoveryResult:
    x_hat: np.ndarray
    iterations: int
    residual_norm: float
    support_recovered: Optional[bool] = None
    relative_error: float = float("nan")


def hard_threshold(x, s):
    """Keep the ``s`` largest-magnitude entries; ties go to the lower index."""
    x = np.asarray(x)
    out = np.zeros_like(x)
    if s <= 0:
        return out
    keep = np.argsort(-np.abs(x), kind="stable")[:s]
    out[keep] = x[keep]
    return out


def _check_y(chain, y):
    y = np.asarray(y)
    if y.shape != (chain.k,):
        raise LengthMismatch(f"expected y of length {chain.k}, got shape {y.shape}")
    return y


def _finish(x_hat, iterations, residual, x_true):
    if x_true is None:
        return RecoveryResult(x_hat, iterations, residual)
    x_true = np.asarray(x_true)
    denom = np.linalg.norm(x_true)
    err = np.linalg.norm(x_hat - x_true)
    rel = err / denom if denom > 0 else err
    same = np.array_equal(np.flatnonzero(x_hat), np.flatnonzero(x_true))
    return RecoveryResult(x_hat, iterations, residual, bool(same), float(rel))


def iht_recover(chain, y, s, max_iters=200, tol=None, step=1.0, x_true=None):
    """Iterative hard thresholding ``x <- H_s(x + step * A^*(y - A x))``.

    Stops once ``||A x - y|| <= tol`` (default ``1e-10 * ||y||``) or after
    ``max_iters`` iterations.
    """
    y = _check_y(chain, y)
    if tol is None:
        tol = 1e-10 * np.linalg.norm(y)
    x = np.zeros(chain.n, dtype=np.result_type(y, chain.dtype))
    residual = np.inf
    it = 0
    for it in range(1, max_iters + 1):
        x = hard_threshold(x + step * apply_chain(chain, y - apply_chain(chain, x), "adjoint"), s)
        residual = float(np.linalg.norm(apply_chain(chain, x) - y))
        if residual <= tol:
            break
    return _finish(x, it, residual, x_true)


def omp_recover(chain, y, s, tol=None, x_true=None, cond_limit=1e12):
    """Orthogonal matching pursuit with at most ``s`` rounds.

    Each round adds the index maximizing ``|A^* r|`` (lowest index on ties)
    and refits the coefficients by solving the normal equations of the
    selected columns. Stops early once ``||r|| <= tol`` (default
    ``1e-12 * ||y||``).
    """
    y = _check_y(chain, y)
    if tol is None:
        tol = 1e-12 * np.linalg.norm(y)
    dtype = np.result_type(y, chain.dtype)
    x = np.zeros(chain.n, dtype=dtype)
    support = []
    columns = []
    r = y.astype(dtype)
    residual = float(np.linalg.norm(r))
    rounds = 0
    while rounds < s and residual > tol:
        corr = np.abs(apply_chain(chain, r, "adjoint"))
        corr[support] = -1.0
        j = int(np.argmax(corr))
        e = np.zeros(chain.n, dtype=dtype)
        e[j] = 1
        support.append(j)
        columns.append(apply_chain(chain, e))
        A_T = np.stack(columns, axis=1)
        gram = A_T.conj().T @ A_T
        if np.linalg.cond(gram) > cond_limit:
            raise SingularSubproblem(
                f"selected columns {sorted(support)} are numerically rank deficient"
            )
        coef = np.linalg.solve(gram, A_T.conj().T @ y)
        r = y - A_T @ coef
        residual = float(np.linalg.norm(r))
        rounds += 1
    if support:
        x[support] = coef
    return _finish(x, rounds, residual, x_true)


def sparse_instance(n, s, seed, complex_field=False):
    """Ground-truth ``s``-sparse vector: uniform support, Gaussian entries."""
    key = rng.derive_seed(seed, 0, "instance")
    support = rng.random_subsets(key, n, s)
    x = np.zeros(n, dtype=np.complex128 if complex_field else np.float64)
    if complex_field:
        g = rng.normals(key, 2 * s, offset=n)
        x[support] = g[:s] + 1j * g[s:]
    else:
        x[support] = rng.normals(key, s, offset=n)
    return x


def recovery_experiment(template, s, instances, seed, algorithms=("iht", "omp"),
                        max_iters=200, step=1.0, success_tol=SUCCESS_TOL):
    """Run noiseless recovery on ``instances`` random problems.

    Instance ``i`` draws a fresh operator from ``template`` with master seed
    ``derive_seed(seed, i, "recovery-chain")`` and a ground truth from
    ``derive_seed(seed, i, "recovery-truth")``.

    Returns a list of dict rows with the recovery CSV columns.
    """
    rows = []
    for i in range(instances):
        chain_seed = rng.derive_seed(seed, i, "recovery-chain")
        spec = replace(template, seed=chain_seed)
        chain = spec.build()
        truth_seed = rng.derive_seed(seed, i, "recovery-truth")
        x_true = sparse_instance(chain.n, s, truth_seed, chain.field == "complex")
        y = apply_chain(chain, x_true)
        for name in algorithms:
            if name == "iht":
                res = iht_recover(chain, y, s, max_iters=max_iters, step=step, x_true=x_true)
            elif name == "omp":
                try:
                    res = omp_recover(chain, y, s, x_true=x_true)
                except SingularSubproblem:
                    res = RecoveryResult(np.zeros(chain.n), 0, float("inf"), False, float("inf"))
            else:
                raise ValueError(f"unknown algorithm {name!r}")
            rows.append({
                "algorithm": name, "n": chain.n, "k": chain.k, "s": s, "seed": chain_seed,
                "success": bool(res.relative_error <= success_tol),
                "iters": res.iterations, "rel_error": res.relative_error,
            })
    return rows


def success_rate(rows, algorithm):
    hits = [r["success"] for r in rows if r["algorithm"] == algorithm]
    return sum(hits) / len(hits) if hits else float("nan")
