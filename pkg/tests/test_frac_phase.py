import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats
from scipy.special import erfcx

from fracph import RngStream
from fracph.frac_phase import (
    FracPHDist,
    check_alpha,
    fph_cdf,
    fph_density,
    fph_laplace,
    fph_sample,
    fph_sample_path,
    fph_sample_product,
    fph_transition_matrix,
)
from fracph.numerics import caputo_numeric, matrix_exp
from fracph.phase_type import PHDist, ph_cdf, ph_density, ph_laplace, ph_sample
from fracph.verify import check_kolmogorov, tail_slope

from conftest import ph_models
from oracles import ml_series

ERLANG2 = ([1.0, 0.0], [[-1.0, 1.0], [0.0, -1.0]])


def test_alpha_range():
    assert check_alpha(0.5) == 0.5
    for bad in (0.0, 1.2, float("nan")):
        with pytest.raises(ValueError):
            check_alpha(bad)


def test_scalar_density_against_oracles():
    d = FracPHDist.from_arrays([1.0], [[-1.0]], 0.5)
    ref = ml_series(0.5, 0.5, -1.0).real
    assert fph_density(d, 1.0) == pytest.approx(ref, abs=1e-12)
    # E_{1/2,1/2}(-x) = 1/sqrt(pi) - x erfcx(x)
    x = np.array([0.01, 0.5, 2.0, 30.0])
    closed = x**-0.5 * (1 / math.sqrt(math.pi) - x**0.5 * erfcx(x**0.5))
    np.testing.assert_allclose(fph_density(d, x), closed, rtol=1e-9)


def test_density_reduces_at_alpha_one():
    base = PHDist(*ERLANG2)
    d = FracPHDist(base, 1.0)
    x = np.linspace(0.0, 5.0, 11)
    np.testing.assert_allclose(fph_density(d, x), ph_density(base, x), atol=1e-13)
    np.testing.assert_allclose(fph_cdf(d, x), ph_cdf(base, x), atol=1e-13)


def test_density_diverges_at_origin():
    d = FracPHDist.from_arrays(*ERLANG2, 0.7)
    assert fph_density(FracPHDist.from_arrays([1.0], [[-1.0]], 0.7), 0.0) == math.inf
    assert fph_density(d, 0.0) == math.inf
    assert np.isfinite(fph_density(d, 1e-4))


def test_cdf_at_zero_is_atom():
    d = FracPHDist.from_arrays([0.6, 0.1], [[-2.0, 1.0], [0.5, -1.0]], 0.8)
    assert fph_cdf(d, 0.0) == pytest.approx(0.3, abs=1e-15)


def test_laplace_examples():
    d = FracPHDist.from_arrays([1.0], [[-2.0]], 0.7)
    assert fph_laplace(d, 1.0) == pytest.approx(2.0 / 3.0, abs=1e-15)
    assert fph_laplace(d, 0.0) == pytest.approx(1.0, abs=1e-15)
    base = PHDist([0.6, 0.1], [[-2.0, 1.0], [0.5, -1.0]])
    for u in (0.3, 1.0, 4.0):
        assert fph_laplace(FracPHDist(base, 1.0), u) == pytest.approx(ph_laplace(base, u), abs=1e-12)


def test_transition_matrix_examples():
    d = FracPHDist.from_arrays(*ERLANG2, 0.6)
    np.testing.assert_array_equal(fph_transition_matrix(d, 0.0), np.eye(2))
    one = FracPHDist.from_arrays(*ERLANG2, 1.0)
    np.testing.assert_allclose(fph_transition_matrix(one, 1.7), matrix_exp(np.array(ERLANG2[1]) * 1.7), atol=1e-14)
    stack = fph_transition_matrix(d, [0.5, 1.0])
    assert stack.shape == (2, 2, 2)
    np.testing.assert_allclose(stack[1], fph_transition_matrix(d, 1.0))


@pytest.mark.parametrize("alpha", [0.6, 0.9])
def test_density_integrates_to_mass(alpha):
    base = PHDist([0.7, 0.2], [[-2.0, 1.0], [0.5, -1.0]])
    d = FracPHDist(base, alpha)
    X = 50.0

    def smooth(x):
        # x**(alpha-1) is carried by the algebraic quadrature weight
        x = max(x, 1e-300)
        return fph_density(d, x) * x ** (1.0 - alpha)

    val, _ = integrate.quad(smooth, 0.0, X, weight="alg", wvar=(alpha - 1.0, 0.0), limit=200)
    assert val + (1.0 - fph_cdf(d, X)) == pytest.approx(base.mass, abs=1e-3)
    for x in (0.2, 1.0, 5.0):
        part, _ = integrate.quad(smooth, 0.0, x, weight="alg", wvar=(alpha - 1.0, 0.0))
        assert fph_cdf(d, x) == pytest.approx(d.atom + part, abs=1e-4)


@settings(max_examples=10, deadline=None)
@given(ph_models(max_p=3), st.sampled_from([0.5, 0.75, 0.9]))
def test_cdf_monotone_and_bounded(base, alpha):
    d = FracPHDist(base, alpha)
    F = fph_cdf(d, np.linspace(0.0, 20.0, 81))
    assert np.all(np.diff(F) >= -1e-12)
    assert F[0] == pytest.approx(d.atom, abs=1e-12)
    assert np.all((F >= -1e-12) & (F <= 1 + 1e-12))


@settings(max_examples=10, deadline=None)
@given(ph_models(max_p=3), st.sampled_from([0.6, 0.8]))
def test_transition_rows_substochastic(base, alpha):
    P = fph_transition_matrix(FracPHDist(base, alpha), [0.1, 1.0, 10.0])
    rows = P.sum(axis=2)
    assert np.all(rows >= -1e-9) and np.all(rows <= 1 + 1e-9)


@pytest.mark.parametrize("alpha", [0.7, 0.9, 1.0])
def test_fractional_kolmogorov(alpha):
    d = FracPHDist.from_arrays(*ERLANG2, alpha)
    report = check_kolmogorov(d, [0.5, 1.0, 2.0])
    assert report.passed, report.details


def test_kolmogorov_by_hand():
    d = FracPHDist.from_arrays([0.5, 0.5], [[-3.0, 2.0], [0.0, -4.0]], 0.8)
    grid = np.linspace(0.0, 1.0, 4001)
    P = fph_transition_matrix(d, grid)
    D = caputo_numeric(P, 0.8, 1.0)
    target = d.T @ P[-1]
    assert np.abs(D - target).max() <= 1e-3 * np.abs(target).max()


def test_sample_mean_of_exp_total():
    d = FracPHDist.from_arrays([1.0], [[-1.0]], 0.7)
    x = fph_sample(RngStream(1), d, 200_000)
    assert abs(np.exp(-x).mean() - 0.5) < 0.005


def test_alpha_one_matches_ph_sampler():
    base = PHDist([0.6, 0.4], [[-2.0, 1.0], [0.5, -1.0]])
    a = fph_sample(RngStream(2), FracPHDist(base, 1.0), 10_000)
    b = ph_sample(RngStream(3), base, 10_000)
    assert stats.ks_2samp(a, b).statistic < 0.02


def test_product_at_alpha_one_is_w():
    base = PHDist(*ERLANG2)
    d = FracPHDist(base, 1.0)
    np.testing.assert_array_equal(fph_sample(RngStream(4), d, 50, "product"), ph_sample(RngStream(4), base, 50))
    assert fph_sample_product(RngStream(5), d) == ph_sample(RngStream(5), base, 1)[0]


@pytest.mark.parametrize("alpha", [0.6, 0.8])
def test_samplers_agree(alpha):
    d = FracPHDist.from_arrays([0.5, 0.5], [[-3.0, 2.0], [0.0, -4.0]], alpha)
    a = fph_sample(RngStream(6), d, 10_000, "path")
    b = fph_sample(RngStream(7), d, 10_000, "product")
    assert stats.ks_2samp(a, b).statistic < 1.5 * 1.36 * math.sqrt(2 / 10_000)


def test_sampler_laplace():
    d = FracPHDist.from_arrays([0.5, 0.3], [[-3.0, 2.0], [0.0, -4.0]], 0.75)
    for method in ("path", "product"):
        x = fph_sample(RngStream(8), d, 200_000, method)
        for u in (0.5, 2.0):
            e = np.exp(-u * x)
            assert abs(e.mean() - fph_laplace(d, u)) < 4 * e.std(ddof=1) / math.sqrt(x.size)


def test_path_sampler_records():
    d = FracPHDist.from_arrays(*ERLANG2, 0.6)
    rec = fph_sample_path(RngStream(9), d)
    assert rec.states == (0, 1) and all(s > 0 for s in rec.sojourns)
    with pytest.raises(ValueError):
        fph_sample(RngStream(9), d, 5, "bogus")


@pytest.mark.parametrize(
    "alpha",
    [
        0.6,
        pytest.param(
            0.9,
            marks=pytest.mark.xfail(
                strict=True, reason="top-decile regression is biased near alpha=1 (analytic slope about -1.17)"
            ),
        ),
    ],
)
def test_tail_index_top_decile(alpha):
    d = FracPHDist.from_arrays([0.5, 0.5], [[-3.0, 2.0], [0.0, -4.0]], alpha)
    x = fph_sample(RngStream(10), d, 1_000_000)
    assert abs(tail_slope(x, 0.1) + alpha) < 0.1


def test_tail_index_far_tail():
    d = FracPHDist.from_arrays([0.5, 0.5], [[-3.0, 2.0], [0.0, -4.0]], 0.9)
    x = fph_sample(RngStream(10), d, 1_000_000)
    assert abs(tail_slope(x, 0.01) + 0.9) < 0.1
