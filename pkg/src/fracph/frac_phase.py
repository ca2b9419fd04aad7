"""Fractional phase-type distributions PH_alpha(pi, T).

The absorption time of a semi-Markov process whose sojourns in state ``i``
are Mittag-Leffler with rate ``-T_ii``; at ``alpha = 1`` this is PH(pi, T).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend, _pykernels
from .numerics import MLAccuracyError, MLOptions, ml_matrix_scaled, solve_linear
from .phase_type import PathRecord, PHDist, ValidationError, _check_x, ph_sample, ph_sample_path
from .rng import RngStream, sample_positive_stable

__all__ = [
    "FracPHDist",
    "fph_density",
    "fph_cdf",
    "fph_laplace",
    "fph_transition_matrix",
    "fph_sample_path",
    "fph_sample_product",
    "fph_sample",
]


def check_alpha(alpha) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise ValidationError([f"alpha must lie in (0, 1], got {alpha!r}"])
    return alpha


@dataclass(frozen=True, eq=False)
class FracPHDist:
    """PH_alpha with a validated base PH(pi, T)."""

    base: PHDist
    alpha: float

    def __post_init__(self):
        if not isinstance(self.base, PHDist):
            raise TypeError("base must be a PHDist")
        object.__setattr__(self, "alpha", check_alpha(self.alpha))

    @classmethod
    def from_arrays(cls, pi, T, alpha):
        return cls(PHDist(pi, T), alpha)

    @property
    def pi(self):
        return self.base.pi

    @property
    def T(self):
        return self.base.T

    @property
    def exit(self):
        return self.base.exit

    @property
    def atom(self) -> float:
        return self.base.atom

    @property
    def dim(self) -> int:
        return self.base.dim


def _shape(xs, vals):
    return vals.reshape(xs.shape) if xs.ndim else float(vals[0])


def fph_density(d: FracPHDist, x, options: MLOptions | None = None):
    """``x**(alpha-1) pi E_{alpha,alpha}(T x**alpha) t`` for ``x > 0``.

    Diverges like ``x**(alpha-1)`` at the origin when ``alpha < 1``; ``x = 0``
    returns ``inf`` in that case.
    """
    xs = _check_x(x)
    flat = xs.ravel()
    a = d.alpha
    vals = np.empty(flat.size)
    pos = flat > 0
    if pos.any():
        E = ml_matrix_scaled(a, a, d.T, flat[pos] ** a, options)
        vals[pos] = flat[pos] ** (a - 1.0) * np.einsum("i,kij,j->k", d.pi, E, d.exit)
    if (~pos).any():
        vals[~pos] = np.inf if a < 1.0 else float(d.pi @ d.exit)
    return _shape(xs, vals)


def fph_cdf(d: FracPHDist, x, options: MLOptions | None = None):
    """``1 - pi E_{alpha,1}(T x**alpha) e``; equals the atom at ``x = 0``."""
    xs = _check_x(x)
    flat = xs.ravel()
    E = ml_matrix_scaled(d.alpha, 1.0, d.T, flat**d.alpha, options)
    vals = 1.0 - E.sum(axis=2) @ d.pi
    return _shape(xs, vals)


def fph_laplace(d: FracPHDist, u):
    """``atom + pi (u**alpha I - T)^-1 t``."""
    us = _check_x(u)
    eye = np.eye(d.dim)
    vals = np.array([d.atom + d.pi @ solve_linear(ui**d.alpha * eye - d.T, d.exit) for ui in us.ravel()])
    return _shape(us, vals)


def fph_transition_matrix(d: FracPHDist, t, options: MLOptions | None = None):
    """Transition matrix ``P(t) = E_{alpha,1}(T t**alpha)`` of the semi-Markov process.

    A scalar ``t`` gives a (p, p) matrix, an array of times a (k, p, p) stack.

    Raises
    ------
    MLAccuracyError
        If a row sum leaves [0, 1] by more than 1e-6.
    """
    ts = _check_x(t)
    P = ml_matrix_scaled(d.alpha, 1.0, d.T, ts.ravel() ** d.alpha, options)
    rows = P.sum(axis=2)
    if np.any(rows < -1e-6) or np.any(rows > 1.0 + 1e-6):
        raise MLAccuracyError("transition matrix row sums left [0, 1]")
    return P.reshape(ts.shape + P.shape[1:]) if ts.ndim else P[0]


def fph_sample_path(rng: RngStream, d: FracPHDist) -> PathRecord:
    """One semi-Markov path with Mittag-Leffler sojourns."""
    cum_init, cum_jump = d.base.sampling_tables()
    states, sojourns = _pykernels.sample_path(rng.generator, cum_init, cum_jump, d.base.rates, d.alpha)
    return PathRecord(tuple(states), tuple(sojourns))


def fph_sample_product(rng: RngStream, d: FracPHDist) -> float:
    """``W**(1/alpha) * S`` with ``W ~ PH(pi, T)`` and ``S`` positive stable."""
    W = ph_sample_path(rng, d.base).total
    S = sample_positive_stable(rng, d.alpha)
    return W ** (1.0 / d.alpha) * S


def fph_sample(rng: RngStream, d: FracPHDist, size: int, method: str = "path") -> np.ndarray:
    """Batch sampler; ``method`` is ``"path"`` or ``"product"``."""
    size = int(size)
    if method == "path":
        cum_init, cum_jump = d.base.sampling_tables()
        ones = np.ones((d.dim, 1))
        Y, _ = _backend.simulate_rewards(rng.generator, cum_init, cum_jump, d.base.rates, ones, d.alpha, size)
        return Y[:, 0]
    if method == "product":
        W = ph_sample(rng, d.base, size)
        S = sample_positive_stable(rng, d.alpha, size)
        return W ** (1.0 / d.alpha) * S
    raise ValueError(f"unknown sampler {method!r}")
