"""Seedable random variate generation.

Streams are numpy ``Generator`` objects over the counter-based Philox4x64
bit generator, keyed by ``SeedSequence(seed, spawn_key=(stream_id,))``.  The
pair (seed, stream_id) therefore pins the variate sequence on every platform,
and distinct stream ids are independent, which is what parallel Monte Carlo
relies on.  Changing this construction is a breaking change.

Uniforms are drawn on the open interval (0, 1) by rejecting exact zeros from
``Generator.random``; the compiled path kernel does the same, draw for draw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "RngStream",
    "InvalidProbabilityError",
    "sample_uniform",
    "sample_exponential",
    "sample_discrete",
    "sample_positive_stable",
    "sample_ml",
    "kanter_factor",
]


class InvalidProbabilityError(ValueError):
    """Raised for probability vectors that are negative or do not sum to one."""


@dataclass
class RngStream:
    """A reproducible random stream identified by ``(seed, stream_id)``."""

    seed: int = 0
    stream_id: int = 0
    generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if not 0 <= int(value) < 2**64:
                raise ValueError(f"{name} must be a 64-bit unsigned integer")
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),))
        self.generator = np.random.Generator(np.random.Philox(ss))

    @property
    def bit_generator(self) -> np.random.BitGenerator:
        return self.generator.bit_generator

    def substream(self, index: int) -> "RngStream":
        """Independent stream for worker ``index`` (same seed, shifted id)."""
        return RngStream(self.seed, (self.stream_id * 1_000_003 + index + 1) % 2**64)


def _open_uniform(gen: np.random.Generator, size):
    u = gen.random(size)
    if size is None:
        while u == 0.0:
            u = gen.random()
        return u
    zero = u == 0.0
    while zero.any():
        u[zero] = gen.random(int(zero.sum()))
        zero = u == 0.0
    return u


def sample_uniform(rng: RngStream, size=None):
    """Uniform variates on the open interval (0, 1)."""
    return _open_uniform(rng.generator, size)


def sample_exponential(rng: RngStream, rate: float, size=None):
    """Exponential variates by inversion, ``-log(U) / rate``."""
    if not rate > 0:
        raise ValueError(f"rate must be positive, got {rate!r}")
    u = _open_uniform(rng.generator, size)
    return -np.log(u) / rate if size is not None else -math.log(u) / rate


def cumulative(probs, atol: float = 1e-12) -> np.ndarray:
    """Validated cumulative table used for inverse-CDF discrete sampling."""
    probs = np.asarray(probs, dtype=float)
    if probs.ndim != 1 or probs.size == 0:
        raise InvalidProbabilityError("probabilities must be a non-empty vector")
    if np.any(probs < 0) or not np.all(np.isfinite(probs)):
        raise InvalidProbabilityError("probabilities must be finite and nonnegative")
    if abs(probs.sum() - 1.0) > atol:
        raise InvalidProbabilityError(f"probabilities sum to {probs.sum()!r}, not 1")
    cum = np.cumsum(probs)
    cum[-1] = 1.0
    return cum


def sample_discrete(rng: RngStream, probs, size=None):
    """Index ``j`` with probability ``probs[j]`` (inverse CDF)."""
    cum = cumulative(probs)
    u = _open_uniform(rng.generator, size)
    idx = np.searchsorted(cum, u, side="right")
    idx = np.minimum(idx, cum.size - 1)
    return int(idx) if size is None else idx


def kanter_factor(alpha: float, U):
    """``a(U)`` of Kanter's representation, ``S = (a(U)/E)**((1-alpha)/alpha)``."""
    return (
        np.sin((1.0 - alpha) * U)
        * np.sin(alpha * U) ** (alpha / (1.0 - alpha))
        / np.sin(U) ** (1.0 / (1.0 - alpha))
    )


def sample_positive_stable(rng: RngStream, alpha: float, size=None):
    """Positive stable variates with Laplace transform ``exp(-u**alpha)``.

    ``alpha == 1`` returns exactly 1 and consumes no randomness.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha!r}")
    if alpha == 1.0:
        return 1.0 if size is None else np.ones(size)
    gen = rng.generator
    U = math.pi * _open_uniform(gen, size)
    # sin(U) only underflows at the endpoints, which the open draw excludes
    if size is None:
        while math.sin(U) < 1e-300:
            U = math.pi * _open_uniform(gen, None)
    else:
        bad = np.sin(U) < 1e-300
        while bad.any():
            U[bad] = math.pi * _open_uniform(gen, int(bad.sum()))
            bad = np.sin(U) < 1e-300
    E = -np.log(_open_uniform(gen, size))
    S = (kanter_factor(alpha, U) / E) ** ((1.0 - alpha) / alpha)
    return float(S) if size is None else S


def sample_ml(rng: RngStream, alpha: float, lam: float, size=None):
    """Mittag-Leffler variates, Laplace transform ``lam / (lam + u**alpha)``.

    Drawn as ``W**(1/alpha) * S`` with ``W ~ Exp(lam)`` and ``S`` positive
    stable.  Pillai's scale ``rho`` corresponds to ``lam = rho**(-alpha)``.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha!r}")
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam!r}")
    W = sample_exponential(rng, lam, size)
    if alpha == 1.0:
        return W
    S = sample_positive_stable(rng, alpha, size)
    return W ** (1.0 / alpha) * S
