"""Distribution of ``alpha(x) = ||A x||`` over fresh sign draws.

For the first construction ``alpha(x)`` is the norm of a decoupled degree-2
Rademacher chaos in (eps, eps'); its second moment is exactly 1 for every
unit ``x`` when ``|H[i, j]|^2 = 1/n`` (WHT, DFT). The structure of the
chain (transform, Omega, base projector, scale) stays fixed and only the
sign diagonals are redrawn.
"""

from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from . import rng
from .errors import FieldMismatch, LengthMismatch, NotUnitNorm
from .operators import ChainSpec, DenseProjector, OperatorChain, SignDiag, Subsample, Transform
from .transforms import apply_transform

QUANTILE_LEVELS = (0.9, 0.99, 0.999)
CHAOS_CSV_COLUMNS = ("construction", "n", "k", "trials", "seed", "mean_alpha_sq",
                     "median_alpha", "variance", "q90", "q99", "q999")


@dataclass(frozen=True, eq=False)
class ChaosStats:
    mean_alpha_sq: float
    median_alpha: float
    variance: float
    quantiles: Dict[float, float]
    trials: int
    x: np.ndarray
    samples: np.ndarray = field(repr=False)

    def tail_fraction(self, multiple):
        """Fraction of draws with ``|alpha - median| > multiple * spread``,
        where ``spread`` is the 0.9-quantile minus the median."""
        spread = self.quantiles[0.9] - self.median_alpha
        return float(np.mean(np.abs(self.samples - self.median_alpha) > multiple * spread))


def _trial_sign_keys(seed, trial_indices, stage_count):
    keys = np.empty((len(trial_indices), stage_count), dtype=object)
    for row, t in enumerate(trial_indices):
        trial_key = rng.derive_seed(seed, int(t), "chaos-trial")
        for j in range(stage_count):
            keys[row, j] = rng.derive_seed(trial_key, j, "sign")
    return keys


def alpha_samples(chain, x, trial_indices, seed):
    """``||A_t x||`` for each trial, where ``A_t`` is ``chain`` with every sign
    diagonal redrawn from ``derive_seed(derive_seed(seed, t, "chaos-trial"), j,
    "sign")`` (``j`` counts sign stages in application order).

    ``x`` is one probe of length ``n`` or one probe per trial, shape
    ``(len(trial_indices), n)``.
    """
    sign_stages = [st for st in chain.stages if isinstance(st, SignDiag)]
    keys = _trial_sign_keys(seed, trial_indices, len(sign_stages))
    y = np.broadcast_to(x, (len(trial_indices), chain.n)).copy()
    j = 0
    for stage in chain.stages:
        if isinstance(stage, Transform):
            y = apply_transform(stage.spec, y, "forward", field=chain.field)
        elif isinstance(stage, SignDiag):
            y = y * rng.signs(keys[:, j], chain.n)
            j += 1
        elif isinstance(stage, Subsample):
            y = y[:, stage.support.indices]
        elif isinstance(stage, DenseProjector):
            y = y @ stage.matrix.T
    return chain.scale * np.linalg.norm(y, axis=1)


def chaos_statistics(template, x, trials, seed, batch=4096):
    """Summary statistics of ``alpha(x)`` over ``trials`` sign redraws.

    Parameters
    ----------
    template : ChainSpec or OperatorChain
        Fixes the structure; its own sign draws are ignored.
    x : array_like
        Unit-norm probe vector of length ``n``.
    """
    chain = template.build() if isinstance(template, ChainSpec) else template
    if not isinstance(chain, OperatorChain):
        raise TypeError("template must be a ChainSpec or an OperatorChain")
    x = np.asarray(x)
    if x.shape != (chain.n,):
        raise LengthMismatch(f"expected a vector of length {chain.n}, got shape {x.shape}")
    if chain.field == "real" and np.iscomplexobj(x):
        raise FieldMismatch("complex probe for a real chain")
    if abs(np.linalg.norm(x) - 1.0) > 1e-10:
        raise NotUnitNorm(f"||x|| = {np.linalg.norm(x):.12g}")
    if trials < 100:
        raise ValueError(f"trials must be >= 100, got {trials}")

    samples = np.concatenate([
        alpha_samples(chain, x, np.arange(start, min(trials, start + batch)), seed)
        for start in range(0, trials, batch)
    ])
    quantiles = {q: float(np.quantile(samples, q)) for q in QUANTILE_LEVELS}
    return ChaosStats(
        mean_alpha_sq=float(np.mean(samples**2)),
        median_alpha=float(np.quantile(samples, 0.5)),
        variance=float(np.var(samples)),
        quantiles=quantiles,
        trials=trials,
        x=x.copy(),
        samples=samples,
    )
