"""Intensity sampling strategies and counter-based seed derivation."""
from __future__ import annotations

import math

import numpy as np

from .errors import ValidationError
from .layout import MAX_INTENSITY

STRATEGIES = ("Train", "Test0", "Test1", "Test2", "Test3", "Test4", "Test5")
ZERO_FRACTION = {"Test2": 0.25, "Test3": 0.5, "Test4": 0.75}

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(base_seed: int, strategy: str, index: int) -> int:
    """Seed of sample ``index`` in set ``strategy``; independent of generation order."""
    code = STRATEGIES.index(strategy)
    s = splitmix64(int(base_seed) & _MASK64)
    s = splitmix64(s ^ code)
    return splitmix64(s ^ int(index))


def zero_count(n_sources: int, strategy: str) -> int:
    """Number of zero-power sources, rounding half up."""
    if strategy in ZERO_FRACTION:
        return int(math.floor(n_sources * ZERO_FRACTION[strategy] + 0.5))
    if strategy == "Test5":
        return n_sources - 1
    return 0


def _positive_uniform(rng: np.random.Generator, size) -> np.ndarray:
    # (0, MAX] so that "random" entries are never accidentally zero
    return MAX_INTENSITY * (1.0 - rng.random(size))


def sample_powers(n_sources: int, strategy: str, rng_seed: int) -> np.ndarray:
    if n_sources < 1:
        raise ValidationError("need at least one source")
    if strategy not in STRATEGIES:
        raise ValidationError(f"unknown strategy {strategy!r}")
    rng = np.random.default_rng(int(rng_seed) & _MASK64)
    if strategy in ("Train", "Test0"):
        return _positive_uniform(rng, n_sources)
    if strategy == "Test1":
        return np.full(n_sources, _positive_uniform(rng, 1)[0])
    z = zero_count(n_sources, strategy)
    q = _positive_uniform(rng, n_sources)
    q[rng.choice(n_sources, size=z, replace=False)] = 0.0
    return q
