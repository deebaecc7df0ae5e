"""Structured operators built from sign diagonals and fast transforms.

A chain is an ordered tuple of stages applied left to right to the input,
followed by multiplication with a global ``scale``:

* ``SignDiag``       x -> D_eps x                     (n -> n)
* ``Transform``      x -> H x                         (n -> n)
* ``Subsample``      x -> R_Omega x                   (n -> k, terminal)
* ``DenseProjector`` x -> Q x                         (n -> k, terminal)

The two randomized constructions are

* first construction:   sqrt(n/k) R_Omega H D_eps H D_eps' H
* second construction:  A B_1 B_2 ... B_{r+1} with B_i = D_eps(i) H D_eps'(i) H
  and A a k x n matrix with A A^* = (n/k) Id_k

``scale`` carries the sqrt(n/k) factor, so every SignDiag/Transform stage is
exactly unitary and a Subsample/DenseProjector stage has orthonormal rows
(except for custom chains such as the Gaussian baseline).
"""

import enum
import math
import warnings
from dataclasses import dataclass, field as dc_field
from typing import Optional, Tuple, Union

import numpy as np

from . import rng
from .errors import (
    BadSupport,
    BaseNotScaledOrthonormal,
    ConfigParse,
    FieldMismatch,
    KappaTooLarge,
    LengthMismatch,
    RegimeViolation,
    SizeGuard,
)
from .flatfile import format_flat, parse_flat, parse_float, parse_int
from .transforms import (
    MATERIALIZE_CAP,
    FastTransformSpec,
    TransformKind,
    apply_transform,
    tally,
)

ORTHONORMAL_TOL = 1e-8


class RegimeWarning(UserWarning):
    """Parameters fall outside the regime where the guarantees are proven."""


def _frozen(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SignVector:
    signs: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        s = np.asarray(self.signs, dtype=np.float64)
        if s.ndim != 1 or not np.all(np.abs(s) == 1.0):
            raise ValueError("sign vector entries must be +1 or -1")
        object.__setattr__(self, "signs", _frozen(s))

    def __len__(self):
        return self.signs.shape[0]


def draw_sign_vector(seed, n):
    """Rademacher vector drawn from the SplitMix64 stream keyed by ``seed``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return SignVector(rng.signs(seed, n), seed=int(seed))


@dataclass(frozen=True, eq=False)
class SupportSet:
    """Sorted, duplicate-free subset of ``range(n)``."""

    indices: np.ndarray
    n: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.intp).reshape(-1)
        if idx.size and (idx[0] < 0 or idx[-1] >= self.n or np.any(np.diff(idx) <= 0)):
            raise BadSupport(
                f"support indices must be strictly increasing within [0, {self.n})"
            )
        object.__setattr__(self, "indices", _frozen(idx))

    def __len__(self):
        return self.indices.shape[0]

    def __eq__(self, other):
        return (
            isinstance(other, SupportSet)
            and self.n == other.n
            and np.array_equal(self.indices, other.indices)
        )

    def __hash__(self):
        return hash((self.n, self.indices.tobytes()))

    @classmethod
    def first_k(cls, n, k):
        return cls(np.arange(k), n)

    @classmethod
    def random(cls, n, k, seed):
        return cls(rng.random_subsets(seed, n, k), n)

    @classmethod
    def of(cls, indices, n):
        """Build from any iterable of indices (sorted and checked)."""
        idx = np.sort(np.asarray(list(indices), dtype=np.intp))
        return cls(idx, n)


@dataclass(frozen=True)
class SignDiag:
    signs: SignVector


@dataclass(frozen=True)
class Transform:
    spec: FastTransformSpec


@dataclass(frozen=True)
class Subsample:
    support: SupportSet


@dataclass(frozen=True, eq=False)
class DenseProjector:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.ndim != 2:
            raise ValueError("projector must be a 2-D array")
        object.__setattr__(self, "matrix", _frozen(m))


Stage = Union[SignDiag, Transform, Subsample, DenseProjector]


class Construction(str, enum.Enum):
    THEOREM1 = "theorem1"
    THEOREM2 = "theorem2"
    CUSTOM = "custom"


@dataclass(frozen=True)
class TheoremTwoPlan:
    """Parameters of the bootstrapped construction.

    ``seeds`` holds ``2 (r + 1)`` keys ordered block by block:
    ``seeds[2i]`` draws eps_(i+1) and ``seeds[2i + 1]`` draws eps'_(i+1).
    """

    n: int
    k: int
    s: int
    C_kappa: float
    K: float
    kappa: float
    r: int
    seeds: Tuple[int, ...]
    master_seed: int = 0
    s_min: int = 1

    @property
    def blocks(self):
        return self.r + 1


@dataclass(frozen=True)
class OperatorChain:
    n: int
    k: int
    scale: float
    stages: Tuple[Stage, ...]
    construction: Construction = Construction.CUSTOM
    field: str = "real"
    plan: Optional[TheoremTwoPlan] = dc_field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        object.__setattr__(self, "construction", Construction(self.construction))
        if self.field not in ("real", "complex"):
            raise ValueError(f"field must be 'real' or 'complex', got {self.field!r}")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        dim = self.n
        for pos, stage in enumerate(self.stages):
            if dim != self.n:
                raise ValueError("only the last stage may change the dimension")
            if isinstance(stage, SignDiag):
                if len(stage.signs) != self.n:
                    raise LengthMismatch(f"stage {pos}: sign vector length != {self.n}")
            elif isinstance(stage, Transform):
                if stage.spec.n != self.n:
                    raise LengthMismatch(f"stage {pos}: transform length != {self.n}")
                if stage.spec.field == "complex" and self.field == "real":
                    raise FieldMismatch(f"stage {pos}: complex transform in a real chain")
            elif isinstance(stage, Subsample):
                if stage.support.n != self.n:
                    raise LengthMismatch(f"stage {pos}: support ambient dim != {self.n}")
                dim = len(stage.support)
            elif isinstance(stage, DenseProjector):
                if stage.matrix.shape[1] != self.n:
                    raise LengthMismatch(f"stage {pos}: projector has wrong width")
                if np.iscomplexobj(stage.matrix) and self.field == "real":
                    raise FieldMismatch(f"stage {pos}: complex projector in a real chain")
                dim = stage.matrix.shape[0]
            else:
                raise TypeError(f"unknown stage {stage!r}")
        if dim != self.k:
            raise LengthMismatch(f"stages map to dimension {dim}, chain declares k = {self.k}")

    @property
    def transform_count(self):
        return sum(isinstance(st, Transform) for st in self.stages)

    @property
    def block_count(self):
        """Number of (D H D' H) blocks, i.e. sign diagonals / 2."""
        return sum(isinstance(st, SignDiag) for st in self.stages) // 2

    @property
    def dtype(self):
        return np.complex128 if self.field == "complex" else np.float64


def _check_transform(H, n):
    if H.n != n:
        raise LengthMismatch(f"transform length {H.n} != n = {n}")


def build_theorem1(n, k, omega, seed_eps, seed_eps_prime, H, signs=None):
    """``sqrt(n/k) R_Omega H D_eps H D_eps' H``.

    ``omega`` may be any subset of size ``k``. ``signs`` is a test hook: a
    pair ``(eps, eps_prime)`` of arrays that replaces the seeded draws.
    """
    _check_transform(H, n)
    if not 1 <= k <= n:
        raise BadSupport(f"need 1 <= k <= n, got k = {k}, n = {n}")
    if len(omega) != k or omega.n != n:
        raise BadSupport(f"|omega| = {len(omega)} but k = {k}")
    if signs is None:
        eps = draw_sign_vector(seed_eps, n)
        eps_prime = draw_sign_vector(seed_eps_prime, n)
    else:
        eps, eps_prime = (SignVector(v) for v in signs)
    stages = (
        Transform(H),
        SignDiag(eps_prime),
        Transform(H),
        SignDiag(eps),
        Transform(H),
        Subsample(omega),
    )
    return OperatorChain(
        n, k, math.sqrt(n / k), stages, Construction.THEOREM1, field=H.field
    )


def _ceil_tolerant(value):
    nearest = round(value)
    if abs(value - nearest) <= 1e-9 * max(1.0, abs(value)):
        return int(nearest)
    return math.ceil(value)


def bootstrap_rounds(n, k, kappa):
    """``r = ceil(-ln(2 sqrt(n/k)) / ln(kappa))``, at least 1.

    Quotients within 1e-9 of an integer are snapped to it, so e.g.
    ``ln 16 / ln 4`` gives 2 rather than 3 from rounding noise.
    """
    ratio = -math.log(2.0 * math.sqrt(n / k)) / math.log(kappa)
    return max(1, _ceil_tolerant(ratio))


def plan_theorem2(n, k, s, C_kappa, H, master_seed, kappa_override=None,
                  s_min=1, strict=True):
    """Plan the bootstrapped construction.

    ``kappa = C_kappa * K * sqrt(s k ln(n) / n)`` unless ``kappa_override``
    is given. ``kappa >= 1/2`` is always refused. The regime
    ``s ln n <= k <= sqrt(n)`` and ``s >= s_min`` raise ``RegimeViolation``
    when ``strict``, otherwise they only emit a ``RegimeWarning``.
    """
    _check_transform(H, n)
    if not 1 <= k <= n or s < 1:
        raise BadSupport(f"need 1 <= k <= n and s >= 1, got n={n}, k={k}, s={s}")
    if kappa_override is not None:
        kappa = float(kappa_override)
    else:
        kappa = C_kappa * H.K * math.sqrt(s * k * math.log(n) / n)
    if kappa >= 0.5:
        raise KappaTooLarge(kappa)
    if kappa <= 0:
        raise ValueError(f"kappa must be positive, got {kappa}")

    problems = []
    if s * math.log(n) > k:
        problems.append(f"s ln n = {s * math.log(n):.4g} > k = {k}")
    if k > math.sqrt(n):
        problems.append(f"k = {k} > sqrt(n) = {math.sqrt(n):.4g}")
    if s < s_min:
        problems.append(f"s = {s} < s_min = {s_min}")
    if problems:
        message = "outside the proven regime: " + "; ".join(problems)
        if strict:
            raise RegimeViolation(message)
        warnings.warn(message, RegimeWarning, stacklevel=2)

    r = bootstrap_rounds(n, k, kappa)
    seeds = []
    for block in range(1, r + 2):
        seeds.append(rng.derive_seed(master_seed, block, "eps"))
        seeds.append(rng.derive_seed(master_seed, block, "eps_prime"))
    return TheoremTwoPlan(
        n=n, k=k, s=s, C_kappa=float(C_kappa), K=H.K, kappa=kappa, r=r,
        seeds=tuple(seeds), master_seed=int(master_seed), s_min=s_min,
    )


def build_theorem2(plan, base, H):
    """``A D_eps(1) H D_eps'(1) H ... D_eps(r+1) H D_eps'(r+1) H``.

    ``base`` is either a ``SupportSet`` (giving ``A = sqrt(n/k) R_Omega H``)
    or a dense ``k x n`` array with ``A A^* = (n/k) Id``.
    """
    n, k = plan.n, plan.k
    _check_transform(H, n)
    scale = math.sqrt(n / k)
    if isinstance(base, SupportSet):
        if len(base) != k or base.n != n:
            raise BadSupport(f"|omega| = {len(base)} but k = {k}")
        head = (Transform(H), Subsample(base))
        chain_field = H.field
    else:
        P = np.asarray(base)
        if P.shape != (k, n):
            raise LengthMismatch(f"base must be {k} x {n}, got {P.shape}")
        gram = P @ P.conj().T
        deviation = float(np.max(np.abs(gram - (n / k) * np.eye(k))))
        if deviation > ORTHONORMAL_TOL:
            raise BaseNotScaledOrthonormal(deviation)
        head = (DenseProjector(P / scale),)
        chain_field = "complex" if (np.iscomplexobj(P) or H.field == "complex") else "real"

    stages = []
    # rightmost block acts first
    for block in reversed(range(plan.blocks)):
        eps = draw_sign_vector(plan.seeds[2 * block], n)
        eps_prime = draw_sign_vector(plan.seeds[2 * block + 1], n)
        stages += [Transform(H), SignDiag(eps_prime), Transform(H), SignDiag(eps)]
    stages += head
    return OperatorChain(
        n, k, scale, tuple(stages), Construction.THEOREM2, field=chain_field, plan=plan
    )


def gaussian_baseline(n, k, seed):
    """Dense ``k x n`` matrix with i.i.d. N(0, 1/k) entries."""
    key = rng.derive_seed(seed, 0, "gaussian")
    G = rng.normals(key, k * n).reshape(k, n) / math.sqrt(k)
    return OperatorChain(n, k, 1.0, (DenseProjector(G),), Construction.CUSTOM)


def apply_chain(chain, x, direction="forward"):
    """Apply the chain (or its adjoint) along the last axis of ``x``."""
    x = np.asarray(x)
    if chain.field == "real" and np.iscomplexobj(x):
        raise FieldMismatch("complex input given to a real chain")
    if direction == "forward":
        if x.ndim == 0 or x.shape[-1] != chain.n:
            raise LengthMismatch(f"expected length {chain.n}, got shape {x.shape}")
        y = x.astype(np.result_type(x, np.float64), copy=False)
        for stage in chain.stages:
            y = _stage_forward(stage, y, chain.field)
        tally(y.size)
        return y * chain.scale
    if direction == "adjoint":
        if x.ndim == 0 or x.shape[-1] != chain.k:
            raise LengthMismatch(f"expected length {chain.k}, got shape {x.shape}")
        y = x * chain.scale
        tally(y.size)
        for stage in reversed(chain.stages):
            y = _stage_adjoint(stage, y, chain)
        return y
    raise ValueError(f"direction must be 'forward' or 'adjoint', got {direction!r}")


def _stage_forward(stage, y, chain_field):
    if isinstance(stage, Transform):
        return apply_transform(stage.spec, y, "forward", field=chain_field)
    if isinstance(stage, SignDiag):
        tally(y.size)
        return y * stage.signs.signs
    if isinstance(stage, Subsample):
        return y[..., stage.support.indices]
    tally(y.size // y.shape[-1] * stage.matrix.size)
    return y @ stage.matrix.T


def _stage_adjoint(stage, y, chain):
    if isinstance(stage, Transform):
        return apply_transform(stage.spec, y, "adjoint", field=chain.field)
    if isinstance(stage, SignDiag):
        tally(y.size)
        return y * stage.signs.signs
    if isinstance(stage, Subsample):
        out = np.zeros(y.shape[:-1] + (chain.n,), dtype=y.dtype)
        out[..., stage.support.indices] = y
        return out
    tally(y.size // y.shape[-1] * stage.matrix.size)
    return y @ stage.matrix.conj()


def materialize_chain(chain):
    """Dense ``k x n`` matrix whose column ``j`` is ``apply_chain(chain, e_j)``."""
    if chain.n > MATERIALIZE_CAP:
        raise SizeGuard(f"n = {chain.n} exceeds the materialization cap {MATERIALIZE_CAP}")
    eye = np.eye(chain.n, dtype=chain.dtype)
    return apply_chain(chain, eye).T.copy()


# serialization -----------------------------------------------------------------

CHAIN_KEYS = ("construction", "n", "k", "s", "seed", "omega", "transform",
              "C_kappa", "kappa", "s_min")
CONSTRUCTIONS = ("theorem1", "theorem2", "gaussian-baseline")


@dataclass(frozen=True)
class ChainSpec:
    """Everything needed to rebuild an operator bit for bit.

    ``omega`` is ``first-k``, ``random`` (drawn from ``seed``), a range
    ``a:b`` or an explicit comma-separated index list. ``kappa`` overrides
    the computed bootstrap contraction of the second construction.
    """

    construction: str = "theorem1"
    n: int = 16
    k: int = 8
    s: int = 1
    seed: int = 0
    omega: str = "first-k"
    transform: str = "wht"
    C_kappa: float = 1.0
    kappa: Optional[float] = None
    s_min: int = 1

    def __post_init__(self):
        if self.construction not in CONSTRUCTIONS:
            raise ConfigParse(f"construction must be one of {CONSTRUCTIONS}, got {self.construction!r}")
        try:
            TransformKind(self.transform)
        except ValueError:
            raise ConfigParse(f"unknown transform {self.transform!r}") from None

    def pairs(self):
        for key in CHAIN_KEYS:
            value = getattr(self, key)
            if value is None:
                continue
            yield key, repr(value) if isinstance(value, float) else str(value)

    def to_text(self):
        return format_flat(self.pairs())

    @classmethod
    def from_mapping(cls, raw):
        kwargs = {}
        for key, value in raw.items():
            if key in ("n", "k", "s", "seed", "s_min"):
                kwargs[key] = parse_int(key, value)
            elif key in ("C_kappa", "kappa"):
                kwargs[key] = parse_float(key, value)
            elif key in CHAIN_KEYS:
                kwargs[key] = value
            else:
                raise ConfigParse(f"unknown key {key!r}")
        return cls(**kwargs)

    @classmethod
    def from_text(cls, text):
        return cls.from_mapping(parse_flat(text, allowed=CHAIN_KEYS))

    def transform_spec(self):
        return FastTransformSpec(self.transform, self.n)

    def support(self):
        return resolve_omega(self.omega, self.n, self.k, self.seed)

    def plan(self, strict=False):
        return plan_theorem2(
            self.n, self.k, self.s, self.C_kappa, self.transform_spec(), self.seed,
            kappa_override=self.kappa, s_min=self.s_min, strict=strict,
        )

    def build(self, strict=False):
        if self.construction == "gaussian-baseline":
            return gaussian_baseline(self.n, self.k, self.seed)
        H = self.transform_spec()
        omega = self.support()
        if self.construction == "theorem1":
            return build_theorem1(
                self.n, self.k, omega,
                rng.derive_seed(self.seed, 0, "eps"),
                rng.derive_seed(self.seed, 0, "eps_prime"),
                H,
            )
        return build_theorem2(self.plan(strict=strict), omega, H)


def resolve_omega(policy, n, k, seed):
    policy = policy.strip()
    if policy == "first-k":
        return SupportSet.first_k(n, k)
    if policy == "random":
        return SupportSet.random(n, k, rng.derive_seed(seed, 0, "omega"))
    try:
        if ":" in policy:
            lo, hi = (int(p) for p in policy.split(":"))
            return SupportSet(np.arange(lo, hi), n)
        return SupportSet.of((int(p) for p in policy.split(",") if p.strip()), n)
    except ValueError:
        raise ConfigParse(f"cannot parse omega {policy!r}") from None
