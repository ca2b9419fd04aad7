import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erfcx, rgamma

from fracph.numerics import (
    GridTooCoarseError,
    MLAccuracyError,
    MLOptions,
    SingularMatrixError,
    caputo_numeric,
    gamma,
    matrix_exp,
    ml_matrix,
    ml_matrix_scaled,
    ml_scalar,
    solve_linear,
)

from oracles import ml_matrix_series, ml_series

T11 = np.array([[-3.0, 2.0], [0.0, -4.0]])
ERLANG3 = np.array([[-1.0, 1.0, 0.0], [0.0, -1.0, 1.0], [0.0, 0.0, -1.0]])


@pytest.mark.parametrize("x, expected", [(1.0, 1.0), (5.0, 24.0), (0.5, math.sqrt(math.pi))])
def test_gamma_values(x, expected):
    assert gamma(x) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("x", [0.0, -1.5])
def test_gamma_rejects_nonpositive(x):
    with pytest.raises(ValueError):
        gamma(x)


def test_ml_scalar_examples():
    assert ml_scalar(1.0, 1.0, 1.0) == pytest.approx(math.e, abs=1e-12)
    assert ml_scalar(0.7, 0.7, 0.0) == pytest.approx(1.0 / math.gamma(0.7), abs=1e-14)
    # E_{1/2,1}(-x) = exp(x^2) erfc(x)
    assert ml_scalar(0.5, 1.0, -1.0) == pytest.approx(erfcx(1.0), abs=1e-12)
    assert ml_scalar(0.5, 1.0, -1.0) == pytest.approx(0.4275836, abs=1e-7)


def test_ml_scalar_half_order_far_field():
    x = np.linspace(0.0, 100.0, 401)
    np.testing.assert_allclose(ml_scalar(0.5, 1.0, -x), erfcx(x), rtol=0, atol=1e-10)


@given(st.floats(-50.0, 5.0))
def test_ml_scalar_is_exp_at_one(z):
    assert ml_scalar(1.0, 1.0, z) == pytest.approx(math.exp(z), rel=1e-10, abs=1e-10)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7, 0.9, 0.99])
@pytest.mark.parametrize("beta_kind", ["alpha", "one", "alpha+1"])
def test_ml_scalar_negative_axis_against_oracle(alpha, beta_kind):
    beta = {"alpha": alpha, "one": 1.0, "alpha+1": alpha + 1.0}[beta_kind]
    # dense through the switch between series, contour and expansion
    zs = [-0.3, -2.0, -4.99, -5.01, -5.5, -7.0, -9.0, -12.0, -18.0, -25.0, -40.0]
    for z in zs:
        if abs(z) ** (1 / alpha) > 200:
            continue
        ref = ml_series(alpha, beta, z).real
        assert abs(ml_scalar(alpha, beta, z) - ref) <= 1e-10 * max(1.0, abs(ref)), z


@pytest.mark.parametrize("alpha", [0.5, 0.8])
def test_ml_scalar_complex_arguments(alpha):
    for z in [2.0 + 1.0j, -3.0 + 4.0j, -6.0 - 0.5j, 0.5j * 10]:
        ref = ml_series(alpha, alpha, z)
        got = ml_scalar(alpha, alpha, z)
        assert abs(got - ref) <= 1e-10 * max(1.0, abs(ref))


def test_ml_scalar_rejects_bad_parameters():
    with pytest.raises(ValueError):
        ml_scalar(1.5, 1.0, 0.0)
    with pytest.raises(ValueError):
        ml_scalar(0.5, 1.0, float("nan"))


def test_ml_matrix_diagonal():
    d = np.array([-0.5, -3.0, -12.0])
    got = ml_matrix(0.8, 1.0, np.diag(d))
    np.testing.assert_allclose(got, np.diag(ml_scalar(0.8, 1.0, d)), atol=1e-13)


def test_ml_matrix_exp_case():
    M = np.array([[-2.0, 1.0], [0.5, -1.0]])
    np.testing.assert_allclose(ml_matrix(1.0, 1.0, M), matrix_exp(M), atol=1e-14)


def test_ml_matrix_block_against_series_oracle():
    ref = np.array(ml_matrix_series(0.9, 0.9, T11, terms=300))
    for method in ("auto", "series", "eig", "contour"):
        np.testing.assert_allclose(ml_matrix(0.9, 0.9, T11, method=method), ref, atol=1e-12)


def test_ml_matrix_defective_routes_agree():
    ref = np.array(ml_matrix_series(0.7, 1.0, 3 * ERLANG3, terms=300))
    np.testing.assert_allclose(ml_matrix(0.7, 1.0, 3 * ERLANG3), ref, atol=1e-11)
    np.testing.assert_allclose(ml_matrix(0.7, 1.0, 3 * ERLANG3, method="contour"), ref, atol=1e-11)
    with pytest.raises(MLAccuracyError):
        ml_matrix(0.7, 1.0, ERLANG3, method="eig")


def test_ml_matrix_large_defective_argument():
    # far outside the series disk: contour route on a Jordan block
    M = 20 * np.array([[-1.0, 1.0], [0.0, -1.0]])
    got = ml_matrix(0.6, 1.0, M)
    x = 20.0
    # E(J) for a 2x2 Jordan block: [[E(l), x E'(l)], [0, E(l)]] with l = -x
    h = 1e-4
    deriv = (ml_scalar(0.6, 1.0, -x + h) - ml_scalar(0.6, 1.0, -x - h)) / (2 * h)
    np.testing.assert_allclose(got[0, 0], ml_scalar(0.6, 1.0, -x), atol=1e-11)
    np.testing.assert_allclose(got[0, 1], x * deriv, atol=1e-7)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.5, 0.75, 1.0]), st.sampled_from([0.5, 1.0, 1.5]))
def test_ml_matrix_small_norm_series(seed, alpha, beta):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(3, 3))
    M *= 2.0 / max(np.linalg.norm(M, 2), 1e-12) * rng.uniform(0.1, 1.0)
    ref = np.zeros((3, 3))
    power = np.eye(3)
    for k in range(400):
        ref += power * rgamma(alpha * k + beta)
        power = power @ M
    np.testing.assert_allclose(ml_matrix(alpha, beta, M), ref, atol=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_ml_matrix_commutes_with_similarity(seed):
    rng = np.random.default_rng(seed)
    d = -rng.uniform(0.1, 8.0, size=3)
    V = np.eye(3) + 0.3 * rng.normal(size=(3, 3))
    M = V @ np.diag(d) @ np.linalg.inv(V)
    expected = V @ np.diag(ml_scalar(0.7, 0.7, d)) @ np.linalg.inv(V)
    np.testing.assert_allclose(ml_matrix(0.7, 0.7, M), expected, atol=1e-8)
    np.testing.assert_allclose(ml_matrix(0.7, 0.7, M, method="contour"), expected, atol=1e-8)


def test_ml_matrix_scaled_matches_single_calls():
    scales = np.array([0.0, 0.01, 0.7, 3.0, 40.0])
    stack = ml_matrix_scaled(0.85, 1.0, ERLANG3 * 2, scales)
    for s, E in zip(scales, stack):
        np.testing.assert_allclose(E, ml_matrix(0.85, 1.0, ERLANG3 * 2 * s), atol=1e-11)


def test_matrix_exp_examples():
    np.testing.assert_array_equal(matrix_exp(np.zeros((2, 2))), np.eye(2))
    np.testing.assert_allclose(matrix_exp([[0.0, 1.0], [0.0, 0.0]]), [[1.0, 1.0], [0.0, 1.0]], atol=1e-15)
    np.testing.assert_allclose(matrix_exp(np.diag([-1.0, -2.0])), np.diag(np.exp([-1.0, -2.0])), rtol=1e-14)


@given(st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
def test_matrix_exp_commuting_sum(a, b):
    D = np.diag([a, -b, 0.5 * a])
    S = b * np.eye(3)
    np.testing.assert_allclose(matrix_exp(D + S), matrix_exp(D) @ matrix_exp(S), rtol=1e-12)


def test_solve_linear_examples():
    b = np.array([1.0, -2.0])
    np.testing.assert_array_equal(solve_linear(np.eye(2), b), b)
    np.testing.assert_allclose(solve_linear(np.diag([2.0, 4.0]), [2.0, 4.0]), [1.0, 1.0])
    T = np.array([[-2.0, 1.0, 0.5], [0.0, -1.0, 0.5], [0.3, 0.0, -1.0]])
    t = -T.sum(axis=1)
    np.testing.assert_allclose(solve_linear(-T, t), np.ones(3), atol=1e-14)


def test_solve_linear_singular():
    with pytest.raises(SingularMatrixError):
        solve_linear([[1.0, 1.0], [1.0, 1.0]], [1.0, 2.0])


def test_caputo_examples():
    assert caputo_numeric(lambda s: 3.0, 0.4, 1.0) == 0.0
    # Caputo derivative of tau is t^(1-a)/Gamma(2-a); exact for the L1 rule
    assert caputo_numeric(lambda s: s, 0.5, 1.0) == pytest.approx(1.0 / math.gamma(1.5), rel=1e-12)
    got = caputo_numeric(lambda s: ml_scalar(0.7, 1.0, -2.0 * s**0.7), 0.7, 1.0)
    assert got == pytest.approx(-2.0 * ml_scalar(0.7, 1.0, -2.0), rel=1e-3)


def test_caputo_power_function():
    a, t = 0.3, 2.0
    got = caputo_numeric(lambda s: s**2, a, t)
    assert got == pytest.approx(2.0 * t ** (2 - a) / math.gamma(3 - a), rel=1e-3)


def test_caputo_grid_too_coarse():
    with pytest.raises(GridTooCoarseError):
        caputo_numeric(np.array([0.0, 1.0]), 0.5, 1.0)


@pytest.mark.parametrize("alpha", [0.7, 0.9])
def test_caputo_of_transition_matrix(alpha):
    T = np.array([[-1.0, 1.0], [0.0, -1.0]])
    for t in (0.5, 1.0, 2.0):
        grid = np.linspace(0.0, t, 2001)
        P = ml_matrix_scaled(alpha, 1.0, T, grid**alpha)
        D = caputo_numeric(P, alpha, t)
        for target in (T @ P[-1], P[-1] @ T):
            assert np.abs(D - target).max() <= 1e-3 * np.abs(target).max()


def test_options_override_tolerance():
    strict = MLOptions(tol=1e-30)
    with pytest.raises(MLAccuracyError):
        ml_scalar(0.6, 1.0, -7.0, options=strict)
