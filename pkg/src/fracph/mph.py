"""Multivariate reward distributions MPH*(pi, T, R) and MPH*_alpha(pi, T, R).

Component ``k`` of ``Y`` is the reward earned until absorption when state
``i`` pays ``R[i, k]`` per unit of time.  The fractional class runs the same
construction over a semi-Markov process with Mittag-Leffler sojourns.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .frac_phase import FracPHDist, check_alpha, fph_density
from .numerics import solve_linear
from .phase_type import PHDist, ValidationError
from .rng import RngStream, sample_positive_stable

__all__ = [
    "NoClosedFormError",
    "MPHStarDist",
    "MPHAlphaDist",
    "ProjectionResult",
    "check_rewards",
    "mph_laplace",
    "mph_sample",
    "mpha_laplace",
    "mpha_sample_path",
    "mpha_sample_product",
    "project",
    "marginal",
    "power_density",
    "power_transform",
]


class NoClosedFormError(NotImplementedError):
    """No closed-form joint density is known for this distribution."""


def check_rewards(R, p: int) -> np.ndarray:
    """Validate a reward matrix for a ``p``-state chain and return it as floats."""
    R = np.array(R, dtype=float)
    if R.ndim == 1:
        R = R[:, None]
    problems = []
    if R.ndim != 2 or R.shape[0] != p or R.shape[1] < 1:
        raise ValidationError([f"R must have shape ({p}, n) with n >= 1, got {R.shape}"])
    if not np.all(np.isfinite(R)):
        problems.append("R has non-finite entries")
    elif np.any(R < 0):
        problems.append("R entries must be nonnegative")
    else:
        zero = np.flatnonzero(~(R > 0).any(axis=0))
        if zero.size:
            problems.append(f"R columns {zero.tolist()} are identically zero")
    if problems:
        raise ValidationError(problems)
    R.setflags(write=False)
    return R


@dataclass(frozen=True, eq=False)
class MPHStarDist:
    """MPH*(pi, T, R) over a validated base PH(pi, T)."""

    base: PHDist
    R: np.ndarray
    alpha: float = field(default=1.0, init=False)

    def __post_init__(self):
        if not isinstance(self.base, PHDist):
            raise TypeError("base must be a PHDist")
        object.__setattr__(self, "R", check_rewards(self.R, self.base.dim))

    @classmethod
    def from_arrays(cls, pi, T, R):
        return cls(PHDist(pi, T), R)

    @property
    def n(self) -> int:
        return self.R.shape[1]


@dataclass(frozen=True, eq=False)
class MPHAlphaDist:
    """MPH*_alpha(pi, T, R): rewards over the fractional semi-Markov process."""

    base: PHDist
    R: np.ndarray
    alpha: float

    def __post_init__(self):
        if not isinstance(self.base, PHDist):
            raise TypeError("base must be a PHDist")
        object.__setattr__(self, "R", check_rewards(self.R, self.base.dim))
        object.__setattr__(self, "alpha", check_alpha(self.alpha))

    @classmethod
    def from_arrays(cls, pi, T, R, alpha):
        return cls(PHDist(pi, T), R, alpha)

    @property
    def n(self) -> int:
        return self.R.shape[1]

    @property
    def star(self) -> MPHStarDist:
        """The MPH* distribution with the same (pi, T, R)."""
        return MPHStarDist(self.base, self.R)


def _theta(d, theta):
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.shape != (d.n,):
        raise ValueError(f"theta must have length {d.n}")
    if np.any(theta < 0) or not np.all(np.isfinite(theta)):
        raise ValueError("theta must be finite and nonnegative")
    return theta


def _resolvent_transform(base: PHDist, diag) -> float:
    return base.atom + float(base.pi @ solve_linear(np.diag(diag) - base.T, base.exit))


def mph_laplace(d: MPHStarDist, theta) -> float:
    """``E exp(-<theta, Y>) = atom + pi (diag(R theta) - T)^-1 t``."""
    return _resolvent_transform(d.base, d.R @ _theta(d, theta))


def mpha_laplace(d: MPHAlphaDist, theta) -> float:
    """``atom + pi (diag((R theta)**alpha) - T)^-1 t``.

    The power is taken after the inner product with each reward row.
    """
    rho = d.R @ _theta(d, theta)
    return _resolvent_transform(d.base, rho**d.alpha)


def _simulate(rng, base, R, alpha, size):
    cum_init, cum_jump = base.sampling_tables()
    n_paths = 1 if size is None else int(size)
    return _backend.simulate_rewards(rng.generator, cum_init, cum_jump, base.rates, R, alpha, n_paths)


def mph_sample(rng: RngStream, d: MPHStarDist, size=None, return_first: bool = False):
    """Reward vectors from Markov jump paths.

    Returns an n-vector for ``size=None``, else an array (size, n).  With
    ``return_first`` the initial states (``-1`` for the atom) come along.
    """
    Y, first = _simulate(rng, d.base, d.R, 1.0, size)
    if size is None:
        Y, first = Y[0], first[0]
    return (Y, first) if return_first else Y


def mpha_sample_path(rng: RngStream, d: MPHAlphaDist, size=None, return_first: bool = False):
    """Reward vectors from semi-Markov paths with Mittag-Leffler sojourns."""
    Y, first = _simulate(rng, d.base, d.R, d.alpha, size)
    if size is None:
        Y, first = Y[0], first[0]
    return (Y, first) if return_first else Y


def mpha_sample_product(rng: RngStream, d: MPHAlphaDist, size=None, return_first: bool = False):
    """Reward vectors through the stable product representation.

    Draws occupation times ``W ~ MPH*(pi, T, I)``, one positive stable per
    state, and returns ``R^T (W**(1/alpha) * S)``.  Each state's total
    occupation time carries its own stable factor before the rewards mix the
    states; mixing first and then multiplying by one stable per component
    would give a different law whenever a component collects reward from
    more than one state.
    """
    p = d.base.dim
    W, first = _simulate(rng, d.base, np.eye(p), 1.0, size)
    S = sample_positive_stable(rng, d.alpha, W.shape)
    Y = (W ** (1.0 / d.alpha) * S) @ d.R
    if size is None:
        Y, first = Y[0], first[0]
    return (Y, first) if return_first else Y


@dataclass(frozen=True)
class ProjectionResult:
    """Law of ``<Y, w>``: an atom at zero plus PH_alpha on the rewarded states.

    ``states`` holds the original indices of the retained (rewarded) states.
    """

    atom: float
    dist: FracPHDist
    states: np.ndarray


def project(d, w) -> ProjectionResult:
    """Distribution of the linear combination ``<Y, w>`` for ``w >= 0``.

    States without reward under ``w`` are eliminated by a Schur complement;
    the rewarded states keep their dynamics with rows rescaled by
    ``(R w)_i**(-alpha)``.

    Raises
    ------
    ValueError
        For negative or all-zero ``w``, or when no state earns reward.
    SingularMatrixError
        If the unrewarded block is numerically singular.
    """
    w = np.atleast_1d(np.asarray(w, dtype=float))
    if w.shape != (d.n,) or np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError(f"w must be a nonnegative vector of length {d.n}")
    if not np.any(w > 0):
        raise ValueError("w must be nonzero")
    rho = d.R @ w
    plus = rho > 0
    if not plus.any():
        raise ValueError("no state earns reward under w; the projection is identically zero")
    zero = ~plus
    pi, T = d.base.pi, d.base.T
    pi_w = pi[plus].copy()
    core = T[np.ix_(plus, plus)].copy()
    if zero.any():
        T00 = T[np.ix_(zero, zero)]
        T0p = T[np.ix_(zero, plus)]
        G = solve_linear(-T00, T0p)
        # products of nonnegative quantities; clip rounding below zero
        G = np.maximum(G, 0.0)
        pi_w = pi_w + pi[zero] @ G
        fill = np.maximum(T[np.ix_(plus, zero)] @ G, 0.0)
        core = core + fill
    T_w = core / (rho[plus] ** d.alpha)[:, None]
    dist = FracPHDist(PHDist(np.minimum(pi_w, 1.0), T_w), d.alpha)
    return ProjectionResult(atom=dist.atom, dist=dist, states=np.flatnonzero(plus))


def marginal(d, k: int) -> ProjectionResult:
    """Law of component ``k`` (0-based)."""
    if not 0 <= int(k) < d.n:
        raise IndexError(f"component {k} out of range for n={d.n}")
    w = np.zeros(d.n)
    w[int(k)] = 1.0
    return project(d, w)


def power_density(d: MPHAlphaDist, nu):
    """Density of ``Y = X**(1/nu)`` (componentwise) from a closed-form density of ``X``.

    Returns ``f(y_1, ..., y_n) = prod(nu_k y_k**(nu_k - 1)) f_X(y**nu)``.
    Univariate distributions use the PH_alpha density of the single
    component; multivariate ones need an ``ac_density`` method (supplied by
    the constructors), which covers the absolutely continuous part only.

    Raises
    ------
    NoClosedFormError
        When no closed-form density of ``X`` is available.
    """
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    if nu.shape != (d.n,) or np.any(nu <= 0) or not np.all(np.isfinite(nu)):
        raise ValueError(f"nu must be a positive vector of length {d.n}")
    if d.n == 1:
        dist = marginal(d, 0).dist

        def fx(x):
            return fph_density(dist, x)

    elif hasattr(d, "ac_density"):
        fx = d.ac_density
    else:
        raise NoClosedFormError("no closed-form joint density for this distribution")

    def f(*y):
        if len(y) != d.n:
            raise TypeError(f"expected {d.n} coordinates")
        y = [np.asarray(v, dtype=float) for v in y]
        jac = 1.0
        for yk, nk in zip(y, nu):
            jac = jac * nk * yk ** (nk - 1.0)
        return jac * fx(*[yk**nk for yk, nk in zip(y, nu)])

    return f


def power_transform(samples, nu) -> np.ndarray:
    """Map samples of ``X`` to samples of ``X**(1/nu)`` componentwise."""
    samples = np.asarray(samples, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if np.any(nu <= 0):
        raise ValueError("nu must be positive")
    return samples ** (1.0 / nu)
