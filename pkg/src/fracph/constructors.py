"""Structured MPH*_alpha models with closed-form densities.

Two families are provided.

Feed-forward models
    Blocks visited in order, component ``k`` collecting the time spent in
    block ``k``.  Every reward row is a unit vector, so applying the power
    before or after the reward inner product makes no difference.
Bivariate block models
    Three blocks: block 1 pays both components, block 2 only the first and
    block 3 only the second.  From block 1 the chain moves to block 2 or 3
    (or is absorbed), so the joint law splits into two open triangles, the
    diagonal, the two axes and an atom at the origin, each with an explicit
    Mittag-Leffler density.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad_vec

from .mph import MPHAlphaDist
from .numerics import MLOptions, ml_matrix_scaled, solve_linear
from .phase_type import PHDist, ValidationError, check_sub_intensity

__all__ = [
    "FeedForwardSpec",
    "build_feed_forward",
    "feed_forward_laplace",
    "identity_residual",
    "BivariateBlockSpec",
    "BivariateMPHAlpha",
    "build_bivariate",
    "bivariate_density",
    "bivariate_cdf",
    "bivariate_cell_probabilities",
    "bivariate_mass_parts",
    "bivariate_laplace_quad",
    "REGIONS",
]


# ---------------------------------------------------------------------------
# feed-forward
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FeedForwardSpec:
    """Blocks ``C_1..C_n`` with couplings ``D_1..D_{n-1}``; ``pi`` lives on block 1.

    Every block but the last must hand all its outflow to the next block,
    ``-C_i e = D_i e``.
    """

    pi: np.ndarray
    C: tuple
    D: tuple

    def __post_init__(self):
        C = tuple(np.atleast_2d(np.array(c, dtype=float)) for c in self.C)
        D = tuple(np.atleast_2d(np.array(x, dtype=float)) for x in self.D)
        pi = np.atleast_1d(np.array(self.pi, dtype=float))
        problems = []
        if not C:
            raise ValidationError(["at least one block is required"])
        if len(D) != len(C) - 1:
            problems.append(f"need {len(C) - 1} coupling blocks, got {len(D)}")
        for i, c in enumerate(C):
            problems += check_sub_intensity(c, name=f"C{i + 1}")
        if pi.shape != (C[0].shape[0],):
            problems.append(f"pi must have length {C[0].shape[0]}")
        for i, d in enumerate(D[: len(C) - 1]):
            want = (C[i].shape[0], C[i + 1].shape[0])
            if d.shape != want:
                problems.append(f"D{i + 1} must have shape {want}, got {d.shape}")
                continue
            if np.any(d < 0):
                problems.append(f"D{i + 1} entries must be nonnegative")
            scale = max(1.0, float(np.abs(C[i]).max()))
            gap = np.abs(-C[i].sum(axis=1) - d.sum(axis=1)).max()
            if gap > 1e-12 * scale:
                problems.append(f"block {i + 1} flow balance fails: -C e and D e differ by {gap:.3e}")
        if problems:
            raise ValidationError(problems)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "pi", pi)

    @property
    def sizes(self):
        return [c.shape[0] for c in self.C]


def identity_residual(R, thetas, alpha) -> float:
    """Largest gap between ``(R theta)**alpha`` and ``R theta**alpha`` over ``thetas``."""
    thetas = np.atleast_2d(thetas)
    lhs = (thetas @ R.T) ** alpha
    rhs = thetas**alpha @ R.T
    return float(np.abs(lhs - rhs).max())


def build_feed_forward(spec: FeedForwardSpec, alpha: float) -> MPHAlphaDist:
    """Assemble the block-bidiagonal model with block-indicator rewards."""
    sizes = spec.sizes
    p, n = sum(sizes), len(sizes)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    T = np.zeros((p, p))
    R = np.zeros((p, n))
    for i, c in enumerate(spec.C):
        a, b = offsets[i], offsets[i + 1]
        T[a:b, a:b] = c
        R[a:b, i] = 1.0
        if i < n - 1:
            T[a:b, b : offsets[i + 2]] = spec.D[i]
    pi = np.zeros(p)
    pi[: sizes[0]] = spec.pi
    d = MPHAlphaDist(PHDist(pi, T), R, alpha)
    thetas = np.random.default_rng(0).exponential(size=(16, n))
    if identity_residual(d.R, thetas, d.alpha) > 1e-12:
        raise ValidationError(["reward rows are not unit vectors; the power does not commute"])
    return d


def feed_forward_laplace(spec: FeedForwardSpec, alpha: float, theta) -> float:
    """Joint Laplace transform chained block by block.

    ``pi A_1 D_1 A_2 ... D_{n-1} A_n t_n`` with ``A_k = (theta_k**alpha I - C_k)^-1``.
    """
    theta = np.asarray(theta, dtype=float)
    row = spec.pi.copy()
    for k, c in enumerate(spec.C):
        row = solve_linear((theta[k] ** alpha * np.eye(c.shape[0]) - c).T, row)
        if k < len(spec.D):
            row = row @ spec.D[k]
    exit_last = -spec.C[-1].sum(axis=1)
    return float(1.0 - spec.pi.sum() + row @ exit_last)


# ---------------------------------------------------------------------------
# bivariate block model
# ---------------------------------------------------------------------------

REGIONS = ("y<x", "x<y", "x=y", "y=0", "x=0", "origin")


@dataclass(frozen=True, eq=False)
class BivariateBlockSpec:
    """Blocks of the three-block bivariate model.

    ``T`` is assembled as ``[[T11, T12, T13], [0, T22, 0], [0, 0, T33]]`` and
    ``R`` pays block 1 to both components, block 2 to the first and block 3
    to the second.  ``pi2`` and ``pi3`` default to zero.
    """

    pi1: np.ndarray
    T11: np.ndarray
    T12: np.ndarray
    T13: np.ndarray
    T22: np.ndarray
    T33: np.ndarray
    pi2: np.ndarray = None
    pi3: np.ndarray = None

    def __post_init__(self):
        conv = {}
        for name in ("T11", "T12", "T13", "T22", "T33"):
            conv[name] = np.atleast_2d(np.array(getattr(self, name), dtype=float))
        conv["pi1"] = np.atleast_1d(np.array(self.pi1, dtype=float))
        p2, p3 = conv["T22"].shape[0], conv["T33"].shape[0]
        conv["pi2"] = np.zeros(p2) if self.pi2 is None else np.atleast_1d(np.array(self.pi2, dtype=float))
        conv["pi3"] = np.zeros(p3) if self.pi3 is None else np.atleast_1d(np.array(self.pi3, dtype=float))
        p1 = conv["T11"].shape[0]
        problems = []
        expect = {
            "T11": (p1, p1), "T12": (p1, p2), "T13": (p1, p3), "T22": (p2, p2), "T33": (p3, p3),
            "pi1": (p1,), "pi2": (p2,), "pi3": (p3,),
        }
        for name, shape in expect.items():
            if conv[name].shape != shape:
                problems.append(f"{name} must have shape {shape}, got {conv[name].shape}")
        for name in ("T12", "T13"):
            if np.any(conv[name] < 0):
                problems.append(f"{name} entries must be nonnegative")
        if problems:
            raise ValidationError(problems)
        for name, value in conv.items():
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def sizes(self):
        return self.T11.shape[0], self.T22.shape[0], self.T33.shape[0]

    def assemble(self):
        """Full ``(pi, T, R)``."""
        p1, p2, p3 = self.sizes
        p = p1 + p2 + p3
        T = np.zeros((p, p))
        T[:p1, :p1] = self.T11
        T[:p1, p1 : p1 + p2] = self.T12
        T[:p1, p1 + p2 :] = self.T13
        T[p1 : p1 + p2, p1 : p1 + p2] = self.T22
        T[p1 + p2 :, p1 + p2 :] = self.T33
        R = np.zeros((p, 2))
        R[:p1] = 1.0
        R[p1 : p1 + p2, 0] = 1.0
        R[p1 + p2 :, 1] = 1.0
        pi = np.concatenate([self.pi1, self.pi2, self.pi3])
        return pi, T, R


@dataclass(frozen=True, eq=False)
class BivariateMPHAlpha(MPHAlphaDist):
    """MPH*_alpha built from a :class:`BivariateBlockSpec`; knows its density."""

    spec: BivariateBlockSpec = None
    exits: tuple = field(init=False, repr=False)

    def __post_init__(self):
        super().__post_init__()
        if not isinstance(self.spec, BivariateBlockSpec):
            raise TypeError("spec must be a BivariateBlockSpec")
        s = self.spec
        t1 = -(s.T11.sum(axis=1) + s.T12.sum(axis=1) + s.T13.sum(axis=1))
        t2 = -s.T22.sum(axis=1)
        t3 = -s.T33.sum(axis=1)
        tol = 1e-12 * max(1.0, float(np.abs(self.base.T).max()))
        t1 = np.where(np.abs(t1) > tol, t1, 0.0)
        object.__setattr__(self, "exits", (t1, t2, t3))

    def ac_density(self, x, y):
        """Density of the two open triangles (zero on the axes and the diagonal)."""
        return _interior_density(self, x, y)


def build_bivariate(spec: BivariateBlockSpec, alpha: float) -> BivariateMPHAlpha:
    """Assemble and validate the three-block bivariate model."""
    pi, T, R = spec.assemble()
    return BivariateMPHAlpha(PHDist(pi, T), R, alpha, spec=spec)


def _kernel(alpha, T, s, options=None):
    """``s**(alpha-1) E_{alpha,alpha}(T s**alpha)`` for ``s > 0``; shape (k, p, p)."""
    s = np.asarray(s, dtype=float)
    return s[:, None, None] ** (alpha - 1.0) * ml_matrix_scaled(alpha, alpha, T, s**alpha, options)


def _integrated_kernel(alpha, T, s, options=None):
    """``int_0^s kernel = s**alpha E_{alpha,alpha+1}(T s**alpha)``; shape (k, p, p)."""
    s = np.asarray(s, dtype=float)
    return s[:, None, None] ** alpha * ml_matrix_scaled(alpha, alpha + 1.0, T, s**alpha, options)


def _interior_density(d: BivariateMPHAlpha, x, y, options=None):
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    if np.any(x < 0) or np.any(y < 0):
        raise ValueError("coordinates must be nonnegative")
    s, a = d.spec, d.alpha
    t1, t2, t3 = d.exits
    xf, yf = x.ravel(), y.ravel()
    out = np.zeros(xf.size)
    lower = (yf > 0) & (yf < xf)
    upper = (xf > 0) & (xf < yf)
    if lower.any():
        A = _kernel(a, s.T11, yf[lower], options)
        B = _kernel(a, s.T22, xf[lower] - yf[lower], options)
        out[lower] = np.einsum("i,kij,jl,klm,m->k", s.pi1, A, s.T12, B, t2)
    if upper.any():
        A = _kernel(a, s.T11, xf[upper], options)
        B = _kernel(a, s.T33, yf[upper] - xf[upper], options)
        out[upper] = np.einsum("i,kij,jl,klm,m->k", s.pi1, A, s.T13, B, t3)
    return out.reshape(x.shape) if x.ndim else float(out[0])


def bivariate_density(d: BivariateMPHAlpha, x: float, y: float, options: MLOptions | None = None):
    """Region tag and density value at ``(x, y)``.

    The triangles carry a density with respect to area, the diagonal and the
    axes one with respect to length, and ``"origin"`` returns the atom mass.
    """
    x, y = float(x), float(y)
    if x < 0 or y < 0:
        raise ValueError("coordinates must be nonnegative")
    s, a = d.spec, d.alpha
    t1, t2, t3 = d.exits

    def line(pi, T, t, r):
        return float(pi @ _kernel(a, T, [r], options)[0] @ t)

    if x == 0 and y == 0:
        return "origin", d.base.atom
    if y == 0:
        return "y=0", line(s.pi2, s.T22, t2, x)
    if x == 0:
        return "x=0", line(s.pi3, s.T33, t3, y)
    if x == y:
        return "x=y", line(s.pi1, s.T11, t1, x)
    tag = "y<x" if y < x else "x<y"
    return tag, _interior_density(d, x, y, options)


_GRADE_ABOVE = 8.0


def bivariate_cdf(d: BivariateMPHAlpha, X, Y, nodes: int = 160, options: MLOptions | None = None):
    """``P(Y1 <= X, Y2 <= Y)`` for the bivariate block model.

    The inner integral over the second block is available in closed form,
    the outer one over the block-1 time runs on Gauss-Legendre nodes in the
    variable ``u = a**alpha``, which removes the ``a**(alpha-1)`` singularity.
    Wide ranges are graded as ``u = top * v**3`` so that the nodes still
    resolve the bulk of the block-1 time near the origin.
    """
    X, Y = np.broadcast_arrays(np.asarray(X, dtype=float), np.asarray(Y, dtype=float))
    if np.any(X < 0) or np.any(Y < 0):
        raise ValueError("coordinates must be nonnegative")
    s, a = d.spec, d.alpha
    t1, t2, t3 = d.exits
    Xf, Yf = X.ravel(), Y.ravel()
    m = np.minimum(Xf, Yf)
    g, wts = np.polynomial.legendre.leggauss(nodes)
    g, wts = 0.5 * (g + 1.0), 0.5 * wts
    out = np.full(Xf.size, d.base.atom)
    # axes and diagonal
    out += np.einsum("i,kij,j->k", s.pi2, _integrated_kernel(a, s.T22, Xf, options), t2)
    out += np.einsum("i,kij,j->k", s.pi3, _integrated_kernel(a, s.T33, Yf, options), t3)
    out += np.einsum("i,kij,j->k", s.pi1, _integrated_kernel(a, s.T11, m, options), t1)
    pos = m > 0
    if pos.any():
        top = m[pos] ** a
        k = np.where(top > _GRADE_ABOVE, 3.0, 1.0)[:, None]
        u = top[:, None] * g[None, :] ** k
        w = (top[:, None] * k * g[None, :] ** (k - 1.0) * wts[None, :] / a).ravel()
        E11 = ml_matrix_scaled(a, a, s.T11, u.ravel(), options)
        first = np.einsum("i,kij->kj", s.pi1, E11) * w[:, None]
        av = u.ravel() ** (1.0 / a)
        for Tc, Tjj, tj, bound in ((s.T12, s.T22, t2, Xf[pos]), (s.T13, s.T33, t3, Yf[pos])):
            rest = np.maximum(np.repeat(bound, nodes) - av, 0.0)
            H = _integrated_kernel(a, Tjj, rest, options) @ tj
            vals = np.einsum("kj,jl,kl->k", first, Tc, H)
            out[pos] += vals.reshape(-1, nodes).sum(axis=1)
    return out.reshape(X.shape) if X.ndim else float(out[0])


def bivariate_cell_probabilities(d: BivariateMPHAlpha, x_edges, y_edges, nodes: int = 160):
    """Probabilities of the rectangles ``(x_i, x_{i+1}] x (y_j, y_{j+1}]``."""
    x_edges = np.asarray(x_edges, dtype=float)
    y_edges = np.asarray(y_edges, dtype=float)
    XX, YY = np.meshgrid(x_edges, y_edges, indexing="ij")
    F = bivariate_cdf(d, XX, YY, nodes=nodes)
    return np.diff(np.diff(F, axis=0), axis=1)


def _laplace_matrix(alpha, T, s):
    """``int_0^inf exp(-s a) kernel(a) da`` by adaptive quadrature in ``u = a**alpha``."""

    def integrand(u):
        if u == 0.0:
            return ml_matrix_scaled(alpha, alpha, T, [0.0])[0] / alpha
        return np.exp(-s * u ** (1.0 / alpha)) * ml_matrix_scaled(alpha, alpha, T, [u])[0] / alpha

    val, _ = quad_vec(integrand, 0.0, np.inf, epsabs=1e-11, epsrel=1e-10, limit=400)
    return val


def _parts(d: BivariateMPHAlpha, s1: float, s2: float):
    s, a = d.spec, d.alpha
    t1, t2, t3 = d.exits
    L11 = _laplace_matrix(a, s.T11, s1 + s2)
    L22 = _laplace_matrix(a, s.T22, s1)
    L33 = _laplace_matrix(a, s.T33, s2)
    return {
        "y<x": float(s.pi1 @ L11 @ s.T12 @ L22 @ t2),
        "x<y": float(s.pi1 @ L11 @ s.T13 @ L33 @ t3),
        "x=y": float(s.pi1 @ L11 @ t1),
        "y=0": float(s.pi2 @ L22 @ t2),
        "x=0": float(s.pi3 @ L33 @ t3),
        "origin": d.base.atom,
    }


def bivariate_mass_parts(d: BivariateMPHAlpha) -> dict:
    """Probability of every region, integrating the closed-form density numerically."""
    return _parts(d, 0.0, 0.0)


def bivariate_laplace_quad(d: BivariateMPHAlpha, theta) -> float:
    """Joint Laplace transform by numerical integration of the closed-form density."""
    theta = np.asarray(theta, dtype=float)
    return float(sum(_parts(d, float(theta[0]), float(theta[1])).values()))
