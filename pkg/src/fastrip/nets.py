"""Greedy separated nets on the unit sphere and sparse block decomposition."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from . import rng
from .errors import BudgetExhaustedBeforeAnyPoint, SizeGuard

MAX_NET_DIMENSION = 8
DEFAULT_BUDGET_FACTOR = 10_000


@dataclass(frozen=True, eq=False)
class SeparatedNet:
    """Unit vectors in R^m with pairwise distances > ``mu``.

    ``maximal`` means the greedy sampler stopped because its rejection
    budget ran out, i.e. maximality is certified probabilistically.
    """

    dimension: int
    mu: float
    points: np.ndarray
    maximal: bool
    candidates_drawn: int

    def __len__(self):
        return self.points.shape[0]

    @property
    def cardinality_bound(self):
        return (1.0 + 2.0 / self.mu) ** (2 * self.dimension)

    def min_pairwise_distance(self):
        if len(self) < 2:
            return math.inf
        d, _ = cKDTree(self.points).query(self.points, k=2)
        return float(d[:, 1].min())

    def coverage_radius(self, probes):
        """Largest distance from a probe to its nearest net point."""
        d, _ = cKDTree(self.points).query(np.asarray(probes), k=1)
        return float(np.max(d))

    def as_complex(self):
        """View a net over R^(2m) as unit vectors in C^m."""
        if self.dimension % 2:
            raise ValueError("complex view needs an even real dimension")
        half = self.dimension // 2
        return self.points[:, :half] + 1j * self.points[:, half:]


def random_unit_vectors(key, count, m):
    g = rng.normals(key, count * m).reshape(count, m)
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def build_separated_net(m, mu, seed, budget_factor=DEFAULT_BUDGET_FACTOR,
                        max_candidates=10**9):
    """Greedy maximal ``mu``-separated subset of the unit sphere in R^m.

    Candidates are i.i.d. uniform unit vectors, drawn in batches from the
    streams ``derive_seed(seed, b, "net")``. Each candidate is admitted if it
    is farther than ``mu`` from every admitted point. Sampling stops once
    ``budget_factor * len(net)`` consecutive candidates have been rejected,
    which sets ``maximal``; hitting ``max_candidates`` first leaves it unset.

    For a complex m-sphere pass ``2m`` and use ``SeparatedNet.as_complex``.
    """
    if m < 1 or m > MAX_NET_DIMENSION:
        raise SizeGuard(f"dimension must be in [1, {MAX_NET_DIMENSION}], got {m}")
    if not 0 < mu < 2:
        raise ValueError(f"mu must lie in (0, 2), got {mu}")

    points = []
    tree = None
    streak = 0  # consecutive rejections since the last admission
    drawn = 0
    batch_index = 0
    batch_size = 64
    maximal = False
    while drawn < max_candidates:
        cands = random_unit_vectors(
            rng.derive_seed(seed, batch_index, "net"), batch_size, m
        )
        batch_index += 1
        if tree is None:
            far = np.ones(batch_size, dtype=bool)
        else:
            d, _ = tree.query(cands, k=1, distance_upper_bound=2.0 * mu)
            far = d > mu
        fresh = []
        run_start = 0  # candidates before run_start are already accounted for
        for pos in np.flatnonzero(far):
            budget = budget_factor * len(points)
            if points and streak + (pos - run_start) >= budget:
                break
            c = cands[pos]
            if fresh and np.any(np.linalg.norm(np.asarray(fresh) - c, axis=1) <= mu):
                continue
            fresh.append(c)
            points.append(c)
            streak = 0
            run_start = pos + 1
        budget = budget_factor * len(points)
        if not points:
            raise BudgetExhaustedBeforeAnyPoint("no candidate could be admitted")
        if streak + (batch_size - run_start) >= budget:
            drawn += run_start + (budget - streak)
            maximal = True
            break
        streak += batch_size - run_start
        drawn += batch_size
        if fresh:
            tree = cKDTree(np.asarray(points))
        batch_size = int(min(1 << 16, max(64, 2 * streak)))
    return SeparatedNet(m, float(mu), np.asarray(points), maximal, drawn)


def block_decompose(w, s):
    """Split ``w`` into ``ceil(n / s)`` disjointly supported s-sparse blocks.

    Coordinates are ranked by decreasing magnitude (ties: lower index
    first); block ``i`` holds ranks ``i*s .. (i+1)*s - 1``. The blocks sum
    to ``w`` exactly. If ``||w||_1 <= sqrt(s) rho`` and ``||w||_2 <= rho``,
    the block norms sum to at most ``2 rho``.
    """
    w = np.asarray(w)
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    n = w.shape[0]
    order = np.argsort(-np.abs(w), kind="stable")
    blocks = []
    for i in range(-(-n // s)):
        idx = order[i * s:(i + 1) * s]
        block = np.zeros_like(w)
        block[idx] = w[idx]
        blocks.append(block)
    return blocks
