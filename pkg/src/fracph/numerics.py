"""Special functions and matrix kernels.

The workhorse is the two-parameter Mittag-Leffler function

    E_{a,b}(z) = sum_k z**k / Gamma(a*k + b),    0 < a <= 1,

evaluated for scalar (real or complex) and matrix arguments.  Three scalar
routes are used:

* Taylor series with compensated summation, only where the series is well
  conditioned (the sum of absolute terms stays small);
* the algebraic asymptotic expansion for large negative real arguments when
  its smallest term is below the tolerance;
* numerical inversion of the Laplace transform ``s**(a-b) / (s**a - z)`` by
  the trapezoidal rule on a parabolic contour ``s = mu * (1 + i*u)**2``.

Matrix arguments go through the series (small norm), an eigendecomposition
(well conditioned eigenvectors) or a matrix-valued Laplace inversion built
from resolvents, which is insensitive to defective matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.special import gammaln, rgamma

__all__ = [
    "MLAccuracyError",
    "SingularMatrixError",
    "GridTooCoarseError",
    "MLOptions",
    "gamma",
    "ml_scalar",
    "ml_matrix",
    "ml_matrix_scaled",
    "matrix_exp",
    "solve_linear",
    "caputo_numeric",
]

_EPS = np.finfo(float).eps


class MLAccuracyError(ArithmeticError):
    """Raised when a Mittag-Leffler evaluation cannot meet its tolerance."""


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised by :func:`solve_linear` when a pivot falls below threshold."""


class GridTooCoarseError(ValueError):
    """Raised when a sampled function has too few grid points."""


@dataclass(frozen=True)
class MLOptions:
    """Tolerances for the Mittag-Leffler evaluators.

    Attributes
    ----------
    tol : float
        Absolute error target (relative to ``max(1, |E|)``).
    series_radius : float
        Largest ``|z|`` for which the Taylor series is attempted.
    series_abs_limit : float
        The series is rejected when the sum of absolute terms exceeds this.
    contour_nodes : int
        Nominal number of trapezoidal nodes per half contour.
    cond_limit : float
        Largest eigenvector condition number accepted by the eigen route.
    imag_tol : float
        Largest imaginary residue discarded when the result must be real.
    """

    tol: float = 1e-10
    series_radius: float = 5.0
    series_abs_limit: float = 1e3
    contour_nodes: int = 32
    cond_limit: float = 1e6
    imag_tol: float = 1e-8


DEFAULT_OPTIONS = MLOptions()


def _check_params(alpha: float, beta: float) -> None:
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha!r}")
    if not math.isfinite(beta):
        raise ValueError(f"beta must be finite, got {beta!r}")


def gamma(x: float) -> float:
    """Gamma function for positive real arguments."""
    if not x > 0:
        raise ValueError(f"gamma is only defined here for x > 0, got {x!r}")
    return math.gamma(x)


# ---------------------------------------------------------------------------
# scalar Mittag-Leffler
# ---------------------------------------------------------------------------


def _series(alpha, beta, z, kmax=None):
    """Kahan-summed Taylor series.  Returns (value, sum of |terms|)."""
    z = np.asarray(z, dtype=complex)
    r = float(np.max(np.abs(z), initial=0.0))
    if kmax is None:
        # last index whose term can still exceed 1e-18 relative to 1
        k = np.arange(1, 2000)
        logt = k * math.log(max(r, 1e-300)) - gammaln(alpha * k + beta)
        big = np.nonzero(logt > math.log(1e-18))[0]
        kmax = int(k[big[-1]]) + 2 if big.size else 2
    total = np.zeros(z.shape, dtype=complex)
    comp = np.zeros(z.shape, dtype=complex)
    absum = np.zeros(z.shape)
    power = np.ones(z.shape, dtype=complex)
    # large |z| overflows to inf/nan here; callers reject those by absum
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(kmax + 1):
            term = power * rgamma(alpha * k + beta)
            y = term - comp
            t = total + y
            comp = (t - total) - y
            total = t
            absum += np.abs(term)
            power = power * z
    return total, absum


def _asymptotic(alpha, beta, x, tol):
    """Algebraic expansion of E_{a,b}(-x) for large x > 0, 0 < a < 1.

    Returns (value, ok).  Truncation is judged on the envelope
    ``x**-k * Gamma(1 - b + a k) / pi``, which bounds ``|x**-k / Gamma(b - a k)|``;
    the terms themselves vanish whenever ``b - a k`` hits a pole of Gamma
    and would fake convergence.  ``ok`` flags entries whose envelope fell
    below ``tol`` before it started to grow.
    """
    x = np.asarray(x, dtype=float)
    logx = np.log(x)
    total = np.zeros(x.shape)
    ok = np.zeros(x.shape, dtype=bool)
    done = np.zeros(x.shape, dtype=bool)
    prev = np.full(x.shape, np.inf)
    for k in range(1, 400):
        logenv = -k * logx + gammaln(1.0 - beta + alpha * k) - math.log(math.pi)
        done |= logenv > prev
        active = ~done
        term = -((-x) ** (-k)) * rgamma(beta - alpha * k)
        total = np.where(active, total + term, total)
        small = active & (logenv < math.log(tol))
        ok |= small
        done |= small
        prev = logenv
        if done.all():
            break
    return total, ok


def _contour(alpha, beta, z, nodes):
    """Laplace inversion on a parabolic contour, with pole residues.

    Returns (value, roundoff estimate).
    """
    z = np.asarray(z, dtype=complex)
    mu0 = 8.0
    r = np.abs(z)
    phi = np.angle(z)
    if alpha == 1.0:
        has_pole = r > 0
    else:
        has_pole = (np.abs(phi) < alpha * np.pi) & (r > 0)
    sstar = np.where(has_pole, r ** (1.0 / alpha) * np.exp(1j * phi / alpha), 0.0)
    q = np.where(has_pole, np.sqrt(np.abs(sstar)) * np.cos(np.angle(sstar) / 2), 0.0)
    mu = np.full(z.shape, mu0)
    residue = np.zeros(z.shape, dtype=bool)
    # keep every pole at least half a unit (in the u-plane) from the contour
    near = has_pole & (q > 0.5 * math.sqrt(mu0)) & (q <= 1.5)
    mu[near] = np.maximum(mu0, 4.0 * q[near] ** 2)
    far = has_pole & (q > 1.5)
    mu[far] = np.minimum(mu0, q[far] ** 2 / 2.25)
    residue[far] = True
    dist = np.where(has_pole, np.abs(1.0 - q / np.sqrt(mu)), 1.0)
    dist = np.minimum(dist, 1.0)
    umax = np.sqrt(1.0 + 40.0 / mu)
    h = np.minimum(3.0 / nodes, 2 * np.pi * dist / 36.0)
    m = int(np.ceil(np.max(umax / h, initial=1.0)))
    step = umax / m
    k = np.arange(-m, m + 1)
    u = step[..., None] * k
    w = 1.0 + 1j * u
    s = mu[..., None] * w * w
    ds = 2j * mu[..., None] * w
    g = np.exp(s) * s ** (alpha - beta) / (s**alpha - z[..., None]) * ds
    total = g.sum(-1) * step / (2j * np.pi)
    rounding = np.abs(g).sum(-1) * step / (2 * np.pi) * _EPS * 8
    safe = np.where(residue, sstar, 1.0)
    res = np.where(residue, np.exp(safe) * safe ** (1.0 - beta) / alpha, 0.0)
    return total + res, rounding


def _ml_complex(alpha, beta, z, options):
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    todo = np.ones(z.shape, dtype=bool)
    absz = np.abs(z)

    if alpha == 1.0 and beta == 1.0:
        return np.exp(z)

    cand = absz <= options.series_radius
    if cand.any():
        val, absum = _series(alpha, beta, z[cand])
        good = absum <= options.series_abs_limit
        idx = np.flatnonzero(cand)
        out.flat[idx[good]] = val[good]
        todo.flat[idx[good]] = False

    if alpha < 1.0:
        neg = todo & (np.abs(z.imag) == 0) & (z.real < -options.series_radius)
        if neg.any():
            val, ok = _asymptotic(alpha, beta, -z.real[neg], options.tol * 1e-3)
            idx = np.flatnonzero(neg)
            out.flat[idx[ok]] = val[ok]
            todo.flat[idx[ok]] = False

    if todo.any():
        zz = z[todo]
        if alpha == 1.0:
            on_cut = (zz.real <= 0) & (zz.imag == 0) & (zz != 0)
            if on_cut.any():
                raise MLAccuracyError(
                    "E_{1,b}(z) with b != 1 is only supported by the series "
                    f"(|z| <= {options.series_radius}) off the negative axis"
                )
        val, rounding = _contour(alpha, beta, zz, options.contour_nodes)
        scale = np.maximum(1.0, np.abs(val))
        if np.any(rounding > options.tol * scale) or not np.all(np.isfinite(val)):
            raise MLAccuracyError(
                f"Mittag-Leffler contour error estimate {float(np.max(rounding / scale)):.2e} "
                f"exceeds tolerance {options.tol:.1e}"
            )
        out[todo] = val
    return out


def ml_scalar(alpha: float, beta: float, z, options: MLOptions | None = None):
    """Mittag-Leffler function ``E_{alpha,beta}(z)``.

    ``z`` may be a scalar or an array.  Real input yields real output; complex
    input is accepted because the matrix routines need eigenvalues off the
    real axis.

    Raises
    ------
    MLAccuracyError
        If no evaluation route meets ``options.tol``.
    """
    _check_params(alpha, beta)
    options = options or DEFAULT_OPTIONS
    arr = np.asarray(z)
    if not np.all(np.isfinite(arr)):
        raise ValueError("Mittag-Leffler argument must be finite")
    is_complex = np.iscomplexobj(arr)
    val = _ml_complex(alpha, beta, arr, options)
    if not is_complex:
        val = val.real
    if np.ndim(z) == 0:
        return val.item()
    return val


# ---------------------------------------------------------------------------
# matrix functions
# ---------------------------------------------------------------------------


def matrix_exp(M) -> np.ndarray:
    """Matrix exponential (scaling and squaring with Pade approximants)."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix_exp expects a square matrix")
    return scipy.linalg.expm(M)


def _ml_matrix_series(alpha, beta, M):
    p = M.shape[0]
    total = np.zeros_like(M, dtype=float)
    comp = np.zeros_like(total)
    power = np.eye(p)
    small = 0
    for k in range(2000):
        term = power * rgamma(alpha * k + beta)
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if np.max(np.abs(term)) <= 1e-18 * max(1.0, np.max(np.abs(total))):
            small += 1
            if small >= 3:
                return total
        else:
            small = 0
        power = power @ M
    raise MLAccuracyError("matrix Mittag-Leffler series did not converge")


def _series_ok(alpha, beta, norms, options):
    """Mask of scaled norms for which the matrix series is well conditioned."""
    norms = np.atleast_1d(np.asarray(norms, dtype=float))
    ok = norms <= options.series_radius
    if ok.any():
        _, absum = _series(alpha, beta, norms[ok])
        ok[ok] = absum <= options.series_abs_limit / 10
    return ok


def _ml_matrix_series_scaled(alpha, beta, M, scales):
    """Series for ``E(M s)`` over many ``s`` sharing the powers of ``M``."""
    p = M.shape[0]
    r = float(np.linalg.norm(M, 1) * np.max(np.abs(scales)))
    k = np.arange(1, 2000)
    logt = k * math.log(max(r, 1e-300)) - gammaln(alpha * k + beta)
    big = np.nonzero(logt > math.log(1e-18))[0]
    kmax = int(k[big[-1]]) + 3 if big.size else 3
    powers = np.empty((kmax + 1, p, p))
    powers[0] = np.eye(p)
    for j in range(1, kmax + 1):
        powers[j] = powers[j - 1] @ M
    ks = np.arange(kmax + 1)
    coef = scales[:, None] ** ks[None, :] * rgamma(alpha * ks + beta)[None, :]
    return np.einsum("sk,kij->sij", coef, powers)


def _pole_margin(alpha, eigenvalues):
    """Largest Re sqrt(s*) over resolvent poles s*, 0 if none."""
    r = np.abs(eigenvalues)
    phi = np.angle(eigenvalues)
    if alpha == 1.0:
        pole = r > 0
    else:
        pole = (np.abs(phi) < alpha * np.pi) & (r > 0)
    if not pole.any():
        return 0.0
    s = r[pole] ** (1.0 / alpha) * np.exp(1j * phi[pole] / alpha)
    return float(np.max(np.sqrt(np.abs(s)) * np.cos(np.angle(s) / 2)))


def _ml_matrix_resolvent(alpha, beta, Ms, options):
    """Matrix Laplace inversion for a stack of real matrices (k, p, p)."""
    Ms = np.asarray(Ms, dtype=float)
    k, p, _ = Ms.shape
    out = np.empty_like(Ms)
    nodes = options.contour_nodes
    eye = np.eye(p)
    for idx in range(k):
        M = Ms[idx]
        lam = np.linalg.eigvals(M)
        if alpha == 1.0 and beta != 1.0 and np.any((lam.real <= 0) & (np.abs(lam.imag) < 1e-12)):
            raise MLAccuracyError("E_{1,b}(M), b != 1, with spectrum on the negative axis")
        q = _pole_margin(alpha, lam)
        mu = max(8.0, 4.0 * q * q)
        if mu > 16.0:
            raise MLAccuracyError(
                "resolvent contour would need an unstable parabola for this spectrum"
            )
        umax = math.sqrt(1.0 + 40.0 / mu)
        m = int(math.ceil(umax / (3.0 / nodes)))
        step = umax / m
        u = step * np.arange(0, m + 1)
        w = 1.0 + 1j * u
        s = mu * w * w
        ds = 2j * mu * w
        res = np.linalg.solve(s[:, None, None] ** alpha * eye - M, np.broadcast_to(eye, (m + 1, p, p)))
        g = (np.exp(s) * s ** (alpha - beta) * ds)[:, None, None] * res
        g[0] *= 0.5
        # real M: the lower half of the contour contributes the conjugate
        val = (step / np.pi) * g.sum(0).imag
        rounding = step / np.pi * np.abs(g).sum(0).max() * _EPS * 8
        if rounding > options.tol * max(1.0, np.abs(val).max()):
            raise MLAccuracyError("resolvent contour rounding estimate exceeds tolerance")
        out[idx] = val
    return out


def _ml_eig(alpha, beta, w, V, Vinv, scales, options, real):
    vals = _ml_complex(alpha, beta, np.multiply.outer(scales, w), options)
    E = np.einsum("ij,kj,jl->kil", V, vals, Vinv)
    if real:
        resid = np.abs(E.imag).max(axis=(1, 2))
        size = np.maximum(1.0, np.abs(E.real).max(axis=(1, 2)))
        if np.any(resid > options.imag_tol * size):
            raise MLAccuracyError("eigen route left a non-negligible imaginary part")
        return E.real
    return E


def ml_matrix(alpha: float, beta: float, M, options: MLOptions | None = None, method: str = "auto"):
    """Mittag-Leffler function of a square matrix.

    Parameters
    ----------
    method : {"auto", "series", "eig", "contour"}
        ``auto`` picks exp (alpha = beta = 1), the series for small norms,
        eigendecomposition when the eigenvectors are well conditioned and the
        resolvent contour otherwise.
    """
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("ml_matrix expects a square matrix")
    return ml_matrix_scaled(alpha, beta, M, np.array([1.0]), options, method)[0]


def ml_matrix_scaled(alpha: float, beta: float, M, scales, options: MLOptions | None = None, method: str = "auto"):
    """``E_{alpha,beta}(M * s)`` for every ``s`` in ``scales``; shape (k, p, p).

    One eigendecomposition of ``M`` serves every scale, which is what makes
    density grids cheap.
    """
    _check_params(alpha, beta)
    options = options or DEFAULT_OPTIONS
    M = np.asarray(M)
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix argument must be finite")
    scales = np.atleast_1d(np.asarray(scales, dtype=float))
    real = not np.iscomplexobj(M)
    p = M.shape[0]

    if method == "series":
        return np.array([_ml_matrix_series(alpha, beta, M * s) for s in scales])
    if method == "contour":
        if not real:
            raise ValueError("the resolvent contour route expects a real matrix")
        return _ml_matrix_resolvent(alpha, beta, M[None] * scales[:, None, None], options)

    if method == "auto" and alpha == 1.0 and beta == 1.0 and real:
        return np.array([matrix_exp(M * s) for s in scales])

    out = np.empty((scales.size, p, p), dtype=M.dtype if not real else float)
    done = np.zeros(scales.size, dtype=bool)
    if method == "auto" and real:
        done = _series_ok(alpha, beta, np.linalg.norm(M, 1) * np.abs(scales), options)
        if done.any():
            out[done] = _ml_matrix_series_scaled(alpha, beta, M, scales[done])
        if done.all():
            return out

    if method not in ("auto", "eig"):
        raise ValueError(f"unknown method {method!r}")

    w, V = np.linalg.eig(M)
    cond = np.linalg.cond(V)
    if np.isfinite(cond) and cond < options.cond_limit:
        Vinv = np.linalg.inv(V)
        out[~done] = _ml_eig(alpha, beta, w, V, Vinv, scales[~done], options, real)
        return out
    if method == "eig":
        raise MLAccuracyError(f"eigenvector condition number {cond:.2e} too large")
    if not real:
        raise MLAccuracyError("defective complex matrices are not supported")
    out[~done] = _ml_matrix_resolvent(alpha, beta, M[None] * scales[~done, None, None], options)
    return out


# ---------------------------------------------------------------------------
# linear algebra and fractional calculus
# ---------------------------------------------------------------------------


def solve_linear(A, b, pivot_tol: float = 1e-13):
    """Solve ``A x = b`` by pivoted LU; ``b`` may be a vector or a matrix.

    Raises
    ------
    SingularMatrixError
        When the smallest pivot is below ``pivot_tol`` times the largest
        absolute entry of ``A``.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("solve_linear expects a square matrix")
    scale = np.max(np.abs(A), initial=0.0)
    if scale == 0.0:
        raise SingularMatrixError("matrix is identically zero")
    lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
    pivots = np.abs(np.diag(lu))
    if pivots.min() < pivot_tol * scale:
        raise SingularMatrixError(
            f"pivot {pivots.min():.3e} below threshold {pivot_tol * scale:.3e}"
        )
    return scipy.linalg.lu_solve((lu, piv), b)


MIN_CAPUTO_POINTS = 3


def caputo_numeric(samples, alpha: float, t: float, n_points: int = 2000, min_points: int = MIN_CAPUTO_POINTS):
    """Caputo derivative of order ``0 < alpha < 1`` at time ``t``.

    ``samples`` is either an array ``f(t_j)`` on the uniform grid
    ``t_j = j*t/N`` (first axis; trailing axes are treated entrywise) or a
    callable that is sampled on ``n_points + 1`` grid points.

    The integral is taken exactly against the piecewise-linear interpolant of
    ``f`` (cell-wise finite-difference derivative), i.e. the L1 product rule.
    Its error is O(h**(2 - alpha)) for smooth ``f`` and it tolerates the
    ``tau**(alpha - 1)`` derivative singularity at the origin that
    Mittag-Leffler solutions carry.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("caputo_numeric needs 0 < alpha < 1")
    if not t > 0:
        raise ValueError("t must be positive")
    if callable(samples):
        grid = np.linspace(0.0, t, n_points + 1)
        values = np.array([np.asarray(samples(x), dtype=float) for x in grid])
    else:
        values = np.asarray(samples, dtype=float)
    n = values.shape[0] - 1
    if n + 1 < min_points:
        raise GridTooCoarseError(f"need at least {min_points} grid points, got {n + 1}")
    h = t / n
    m = np.arange(n, dtype=float)
    b = (m + 1.0) ** (1.0 - alpha) - m ** (1.0 - alpha)
    diffs = np.diff(values, axis=0)
    # cell j (between t_j and t_{j+1}) carries weight b_{n-1-j}
    weights = b[::-1]
    acc = np.tensordot(weights, diffs, axes=(0, 0))
    return acc * h ** (-alpha) / math.gamma(2.0 - alpha)
