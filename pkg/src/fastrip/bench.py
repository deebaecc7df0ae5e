"""Operation counts and wall-clock scaling of the fast operators."""

import math
import time
from dataclasses import dataclass, replace
from typing import List, Optional

import numpy as np

from . import rng
from .operators import (
    DenseProjector,
    SignDiag,
    Subsample,
    Transform,
    apply_chain,
    materialize_chain,
)
from .transforms import OpCounter, TransformKind, is_power_of_two

BENCH_CSV_COLUMNS = ("construction", "n", "k", "r", "ops", "median_ms", "ratio")


def count_operations(chain):
    """Multiply-adds of one forward application, measured by the kernels."""
    x = np.zeros(chain.n, dtype=chain.dtype)
    x[0] = 1
    with OpCounter() as counter:
        apply_chain(chain, x)
    return counter.ops


def predicted_operations(chain):
    """Closed-form count matching :func:`count_operations` for real-field
    chains: ``n log2 n`` per WHT/DFT, ``n log2 n + n`` per DCT-II, ``n`` per
    sign diagonal, ``k n`` for a dense projector and ``k`` for the scale."""
    n = chain.n
    total = chain.k
    for stage in chain.stages:
        if isinstance(stage, Transform):
            total += n * stage.spec.log2n
            if stage.spec.kind is TransformKind.DCT2:
                total += n
        elif isinstance(stage, SignDiag):
            total += n
        elif isinstance(stage, DenseProjector):
            total += stage.matrix.size
    return total


@dataclass(frozen=True)
class ScalingRow:
    construction: str
    n: int
    k: int
    r: Optional[int]
    ops: int
    median_ms: Optional[float]
    ratio: Optional[float]
    dense_ms: Optional[float] = None


@dataclass(frozen=True)
class ScalingReport:
    rows: List[ScalingRow]

    def ops_slope(self):
        """Least-squares slope of log(ops) against log(n)."""
        n = np.log([row.n for row in self.rows])
        ops = np.log([row.ops for row in self.rows])
        return float(np.polyfit(n, ops, 1)[0])


def _median_ms(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append((time.perf_counter() - t0) * 1e3)
    return float(np.median(times))


def scaling_sweep(template, n_list, repeats=5, timing=True, dense=False):
    """Ops and median apply time for ``template`` at every ``n`` in ``n_list``.

    ``template`` is a ``ChainSpec``; only ``n`` changes across the sweep. The
    ratio column is ``median_ms(n) / median_ms(previous n)``. With
    ``timing=False`` only the deterministic op counts are filled in.
    """
    n_list = list(n_list)
    if any(not is_power_of_two(n) for n in n_list) or n_list != sorted(n_list):
        raise ValueError("n_list must be ascending powers of two")
    rows = []
    previous = None
    for n in n_list:
        spec = replace(template, n=n)
        chain = spec.build()
        r = chain.plan.r if chain.plan is not None else None
        ops = count_operations(chain)
        median_ms = ratio = dense_ms = None
        if timing:
            x = rng.normals(rng.derive_seed(spec.seed, n, "bench"), n).astype(chain.dtype)
            median_ms = _median_ms(lambda: apply_chain(chain, x), repeats)
            if previous:
                ratio = median_ms / previous
            previous = median_ms
            if dense:
                A = materialize_chain(chain)
                dense_ms = _median_ms(lambda: A @ x, repeats)
        rows.append(ScalingRow(spec.construction, n, chain.k, r, ops, median_ms, ratio, dense_ms))
    return ScalingReport(rows)


def nlogn_ratio(n):
    """Expected time ratio ``T(2n) / T(n)`` for ``n log n`` growth."""
    return 2.0 * (1.0 + 1.0 / math.log2(n))
