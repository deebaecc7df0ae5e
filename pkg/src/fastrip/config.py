"""Experiment configuration files (flat ``key = value`` text)."""

import dataclasses
from dataclasses import dataclass
from typing import Optional, Tuple

from .errors import ConfigParse
from .flatfile import format_flat, parse_bool, parse_flat, parse_float, parse_int
from .operators import CONSTRUCTIONS, ChainSpec


@dataclass(frozen=True)
class ExperimentConfig:
    construction: str = "theorem1"
    n: int = 16
    k: int = 8
    s: int = 2
    transform: str = "wht"
    omega: str = "first-k"
    C_kappa: float = 1.0
    kappa_override: Optional[float] = None
    s_min: int = 1
    master_seed: int = 0
    trials: int = 10000
    output: Optional[str] = None
    max_iters: int = 200
    step: float = 1.0
    success_tol: float = 1e-6
    instances: int = 100
    probe: str = "e0"
    n_list: Tuple[int, ...] = (256, 512, 1024, 2048, 4096)
    repeats: int = 5
    timing: bool = False

    def __post_init__(self):
        if self.construction not in CONSTRUCTIONS:
            raise ConfigParse(f"construction must be one of {CONSTRUCTIONS}")
        if self.probe not in ("e0", "random"):
            raise ConfigParse(f"probe must be 'e0' or 'random', got {self.probe!r}")
        for key in ("n", "k", "trials", "instances", "repeats", "max_iters"):
            if getattr(self, key) < 1:
                raise ConfigParse(f"{key} must be >= 1")
        if self.s < 0:
            raise ConfigParse("s must be >= 0")

    def chain_spec(self):
        return ChainSpec(
            construction=self.construction, n=self.n, k=self.k, s=max(self.s, 1),
            seed=self.master_seed, omega=self.omega, transform=self.transform,
            C_kappa=self.C_kappa, kappa=self.kappa_override, s_min=self.s_min,
        )

    def with_overrides(self, **changes):
        changes = {k: v for k, v in changes.items() if v is not None}
        return dataclasses.replace(self, **changes) if changes else self


KEYS = tuple(f.name for f in dataclasses.fields(ExperimentConfig))
_INT_KEYS = {"n", "k", "s", "s_min", "master_seed", "trials", "max_iters",
             "instances", "repeats"}
_FLOAT_KEYS = {"C_kappa", "kappa_override", "step", "success_tol"}


def _format(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    return str(value)


def parse_config(text):
    """Parse config text; unknown keys are an error."""
    raw = parse_flat(text, allowed=KEYS)
    kwargs = {}
    for key, value in raw.items():
        if key in _INT_KEYS:
            kwargs[key] = parse_int(key, value)
        elif key in _FLOAT_KEYS:
            kwargs[key] = parse_float(key, value)
        elif key == "timing":
            kwargs[key] = parse_bool(key, value)
        elif key == "n_list":
            kwargs[key] = tuple(parse_int(key, v.strip()) for v in value.split(",") if v.strip())
        else:
            kwargs[key] = value
    return ExperimentConfig(**kwargs)


def config_pairs(config):
    for key in KEYS:
        value = getattr(config, key)
        if value is not None:
            yield key, _format(value)


def emit_config(config):
    """Canonical text: every set key, in declaration order."""
    return format_flat(config_pairs(config))


def normalize_config_text(text):
    return emit_config(parse_config(text))


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
