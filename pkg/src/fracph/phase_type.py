"""Classical phase-type distributions PH(pi, T).

An initial vector with ``pi.sum() < 1`` is allowed everywhere; the missing
mass ``1 - pi.sum()`` is an atom at zero (immediate absorption).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import _backend, _pykernels
from .numerics import SingularMatrixError, matrix_exp, solve_linear
from .rng import RngStream, cumulative

__all__ = [
    "ValidationError",
    "PHDist",
    "PathRecord",
    "ph_validate",
    "ph_density",
    "ph_cdf",
    "ph_laplace",
    "ph_sample_path",
    "ph_sample",
]


class ValidationError(ValueError):
    """Invalid distribution parameters.

    ``violations`` lists every failed invariant, one message each.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


def _as_matrix(T):
    T = np.array(T, dtype=float)
    if T.ndim == 0:
        T = T.reshape(1, 1)
    return T


def check_sub_intensity(T, name="T"):
    """Return the list of violated sub-intensity invariants of ``T``."""
    problems = []
    if T.ndim != 2 or T.shape[0] != T.shape[1] or T.shape[0] < 1:
        return [f"{name} must be a non-empty square matrix, got shape {T.shape}"]
    if not np.all(np.isfinite(T)):
        return [f"{name} has non-finite entries"]
    p = T.shape[0]
    diag = np.diag(T)
    off = T - np.diag(diag)
    scale = max(1.0, float(np.max(np.abs(T))))
    tol = 1e-12 * scale
    if np.any(diag >= 0):
        bad = np.flatnonzero(diag >= 0).tolist()
        problems.append(f"{name} diagonal entries must be negative (states {bad})")
    if np.any(off < 0):
        problems.append(f"{name} off-diagonal entries must be nonnegative")
    rows = T.sum(axis=1)
    if np.any(rows > tol):
        bad = np.flatnonzero(rows > tol).tolist()
        problems.append(f"{name} row sums must be <= 0 (states {bad})")
    if problems:
        return problems
    exit_ = np.where(-rows > tol, -rows, 0.0)
    # every state must reach absorption through positive rates
    can_exit = exit_ > 0
    reach = can_exit.copy()
    queue = deque(np.flatnonzero(can_exit).tolist())
    while queue:
        j = queue.popleft()
        for i in np.flatnonzero(off[:, j] > 0):
            if not reach[i]:
                reach[i] = True
                queue.append(i)
    if not reach.all():
        bad = np.flatnonzero(~reach).tolist()
        problems.append(f"{name} has states that cannot reach absorption (states {bad}): not transient")
        return problems
    try:
        green = solve_linear(-T, np.eye(p))
    except SingularMatrixError as exc:
        problems.append(f"{name} is singular, states are not all transient ({exc})")
        return problems
    if np.any(green < -1e-12 * max(1.0, float(np.max(np.abs(green))))):
        problems.append(f"(-{name})^-1 has negative entries: eigenvalues not in the open left half-plane")
    return problems


@dataclass(frozen=True, eq=False)
class PHDist:
    """Validated phase-type parameters and derived quantities.

    Attributes
    ----------
    pi, T : ndarray
        Initial vector (may sum to less than one) and sub-intensity matrix.
    exit : ndarray
        Exit rates ``t = -T e``.
    rates : ndarray
        Holding rates ``-T_ii``.
    jump : ndarray
        Embedded chain, shape (p, p + 1); the last column is absorption.
    atom : float
        ``1 - pi.sum()``.
    """

    pi: np.ndarray
    T: np.ndarray
    exit: np.ndarray = field(init=False, repr=False)
    rates: np.ndarray = field(init=False, repr=False)
    jump: np.ndarray = field(init=False, repr=False)
    atom: float = field(init=False, repr=False)

    def __post_init__(self):
        pi = np.atleast_1d(np.array(self.pi, dtype=float))
        T = _as_matrix(self.T)
        problems = check_sub_intensity(T)
        if pi.ndim != 1:
            problems.append("pi must be a vector")
        elif T.ndim == 2 and pi.shape[0] != T.shape[0]:
            problems.append(f"pi has length {pi.shape[0]} but T is {T.shape[0]}x{T.shape[0]}")
        if not np.all(np.isfinite(pi)):
            problems.append("pi has non-finite entries")
        elif np.any(pi < 0):
            problems.append("pi entries must be nonnegative")
        elif pi.sum() > 1.0 + 1e-12:
            problems.append(f"pi sums to {pi.sum():.15g} > 1")
        if problems:
            raise ValidationError(problems)
        pi = np.minimum(pi, 1.0)
        if pi.sum() > 1.0:
            pi = pi / pi.sum()
        rows = T.sum(axis=1)
        tol = 1e-12 * max(1.0, float(np.max(np.abs(T))))
        exit_ = np.where(-rows > tol, -rows, 0.0)
        rates = -np.diag(T).copy()
        jump = np.zeros((T.shape[0], T.shape[0] + 1))
        jump[:, :-1] = T / rates[:, None]
        np.fill_diagonal(jump[:, :-1], 0.0)
        jump[:, -1] = exit_ / rates
        jump /= jump.sum(axis=1, keepdims=True)
        for arr in (pi, T, exit_, rates, jump):
            arr.setflags(write=False)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "exit", exit_)
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "jump", jump)
        object.__setattr__(self, "atom", float(max(0.0, 1.0 - pi.sum())))

    @property
    def dim(self) -> int:
        return self.T.shape[0]

    @property
    def mass(self) -> float:
        """Mass of the absolutely continuous part, ``pi e``."""
        return float(self.pi.sum())

    def sampling_tables(self):
        """Cumulative tables (initial, per-state jump) for the path kernels."""
        init = np.append(self.pi, 1.0 - self.pi.sum())
        init[-1] = max(init[-1], 0.0)
        cum_init = cumulative(init / init.sum())
        cum_jump = np.array([cumulative(row) for row in self.jump])
        return cum_init, cum_jump


def ph_validate(pi, T) -> PHDist:
    """Validate raw parameters; raises :class:`ValidationError` naming every violation."""
    return PHDist(pi, T)


@dataclass(frozen=True)
class PathRecord:
    """One simulated path: visited states (0-based) and their sojourn times."""

    states: tuple
    sojourns: tuple

    @property
    def total(self) -> float:
        return float(sum(self.sojourns))

    @property
    def is_atom(self) -> bool:
        return not self.states


def _check_x(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("argument must be finite and nonnegative")
    return x


def ph_density(d: PHDist, x):
    """Density ``pi exp(T x) t`` of the absolutely continuous part."""
    xs = _check_x(x)
    vals = np.array([d.pi @ matrix_exp(d.T * xi) @ d.exit for xi in xs.ravel()])
    return vals.reshape(xs.shape) if xs.ndim else float(vals[0])


def ph_cdf(d: PHDist, x):
    """``F(x) = 1 - pi exp(T x) e``; ``F(0) = 1 - pi e`` is the atom."""
    xs = _check_x(x)
    e = np.ones(d.dim)
    vals = np.array([1.0 - d.pi @ matrix_exp(d.T * xi) @ e for xi in xs.ravel()])
    return vals.reshape(xs.shape) if xs.ndim else float(vals[0])


def ph_laplace(d: PHDist, u):
    """``E exp(-u X) = atom + pi (uI - T)^-1 t``."""
    us = _check_x(u)
    eye = np.eye(d.dim)
    vals = np.array([d.atom + d.pi @ solve_linear(ui * eye - d.T, d.exit) for ui in us.ravel()])
    return vals.reshape(us.shape) if us.ndim else float(vals[0])


def ph_sample_path(rng: RngStream, d: PHDist) -> PathRecord:
    """Simulate the Markov jump process until absorption."""
    cum_init, cum_jump = d.sampling_tables()
    states, sojourns = _pykernels.sample_path(rng.generator, cum_init, cum_jump, d.rates, 1.0)
    return PathRecord(tuple(states), tuple(sojourns))


def ph_sample(rng: RngStream, d: PHDist, size: int) -> np.ndarray:
    """``size`` absorption times (zeros for the atom), via the path kernel."""
    cum_init, cum_jump = d.sampling_tables()
    ones = np.ones((d.dim, 1))
    Y, _ = _backend.simulate_rewards(rng.generator, cum_init, cum_jump, d.rates, ones, 1.0, int(size))
    return Y[:, 0]
