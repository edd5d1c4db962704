import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from costpath.laplace import (
    GRAD_TOL,
    DesignData,
    SingularModelError,
    coefficient_prior,
    design_from_columns,
    fit_model,
    log_joint,
    log_joint_gradient,
    log_marginal_laplace,
    model_design,
    neg_hessian,
    newton_mode,
)
from costpath.prior import ModelIndicator
from oracles import golden_section_max, quadrature_log_marginal


def random_problem(seed, n=60, d=3):
    rng = np.random.default_rng(seed)
    X = np.column_stack([np.ones(n), rng.standard_normal((n, d - 1))])
    beta = rng.normal(0, 1, d)
    y = (rng.random(n) < 1 / (1 + np.exp(-X @ beta))).astype(float)
    return X, y


# --- design ----------------------------------------------------------------

def test_intercept_only_design(sim450):
    X, d = model_design(sim450[0], ModelIndicator.from_id(0, 9))
    assert d == 1 and np.all(X == 1)


def test_x7_x8_design(sim450):
    data = sim450[0]
    X, d = model_design(data, ModelIndicator.from_indices([6, 7], 9))
    assert d == 3
    np.testing.assert_array_equal(X[:, 1:], data.X_full[:, [7, 8]])


def test_cleveland_full_model_columns(cleveland):
    data = cleveland[0]
    X, d = model_design(data, (1 << 13) - 1)
    assert X.shape == (297, 21) and d == 21


def test_design_rejects_bad_y():
    with pytest.raises(ValueError):
        design_from_columns([0, 2, 1], [[1.0, 2.0, 3.0]])


# --- log joint and mode ----------------------------------------------------

def test_log_joint_at_zero_is_likelihood_plus_prior_density():
    X, y = random_problem(0)
    prior = coefficient_prior(X)
    d = X.shape[1]
    expected = -len(y) * math.log(2) - 0.5 * d * math.log(2 * math.pi) + 0.5 * prior.logdet_precision
    assert log_joint(np.zeros(d), X, y, prior) == pytest.approx(expected, rel=1e-13)


def test_balanced_intercept_only_mode_is_zero():
    X = np.ones((4, 1))
    beta, _, _, ok = newton_mode(X, np.array([0, 0, 1, 1.0]), coefficient_prior(X))
    assert ok and beta[0] == pytest.approx(0.0, abs=1e-12)


def test_all_ones_mode_is_finite_and_matches_golden_section():
    X = np.ones((10, 1))
    y = np.ones(10)
    prior = coefficient_prior(X)
    beta, _, _, ok = newton_mode(X, y, prior)
    oracle = golden_section_max(lambda b: log_joint([b], X, y, prior), 0.0, 5.0)
    assert ok and 0 < beta[0] < np.inf
    assert beta[0] == pytest.approx(oracle, abs=1e-6)


@pytest.mark.parametrize("seed", range(10))
def test_gradient_vanishes_at_mode(seed):
    X, y = random_problem(seed)
    fit = log_marginal_laplace(X, y)
    assert fit.converged and fit.grad_maxnorm <= GRAD_TOL


@pytest.mark.parametrize("seed", range(5))
def test_gradient_matches_finite_differences(seed):
    X, y = random_problem(seed)
    prior = coefficient_prior(X)
    beta = np.random.default_rng(seed).normal(0, 0.5, X.shape[1])
    g = log_joint_gradient(beta, X, y, prior)
    h = 1e-6
    fd = np.array([(log_joint(beta + h * e, X, y, prior) - log_joint(beta - h * e, X, y, prior)) / (2 * h)
                   for e in np.eye(len(beta))])
    np.testing.assert_allclose(g, fd, rtol=1e-5, atol=1e-6)


@pytest.mark.parametrize("seed", range(5))
def test_hessian_matches_gradient_differences(seed):
    X, y = random_problem(seed)
    prior = coefficient_prior(X)
    beta = np.random.default_rng(seed).normal(0, 0.5, X.shape[1])
    H = neg_hessian(beta, X, prior)
    h = 1e-5
    fd = np.column_stack([-(log_joint_gradient(beta + h * e, X, y, prior)
                            - log_joint_gradient(beta - h * e, X, y, prior)) / (2 * h)
                          for e in np.eye(len(beta))])
    np.testing.assert_allclose(H, fd, rtol=1e-3)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(12, 80), st.integers(1, 4))
def test_newton_trace_is_monotone(seed, n, d):
    X, y = random_problem(seed, n, d)
    prior = coefficient_prior(X)
    trace = []
    newton_mode(X, y, prior, trace=trace)
    slack = 8 * np.finfo(float).eps * max(1.0, max(abs(t) for t in trace))
    assert all(b >= a - slack for a, b in zip(trace, trace[1:]))


def test_precision_contract():
    X, _ = random_problem(3, n=50, d=4)
    prior = coefficient_prior(X)
    np.testing.assert_allclose(prior.precision, X.T @ X / (4 * 50), atol=1e-10)
    np.testing.assert_allclose(prior.covariance() @ prior.precision, np.eye(4), atol=1e-10)


# --- Laplace marginal ------------------------------------------------------

@pytest.mark.parametrize("seed", range(5))
def test_column_permutation_invariance(seed):
    X, y = random_problem(seed, n=80, d=4)
    perm = np.random.default_rng(seed).permutation(4)
    a = log_marginal_laplace(X, y).log_marginal
    b = log_marginal_laplace(X[:, perm], y).log_marginal
    assert abs(a - b) <= 1e-9


def test_d2_example_within_quadrature_tolerance():
    rng = np.random.default_rng(20)
    x = rng.standard_normal(20)
    y = (rng.random(20) < 1 / (1 + np.exp(-(0.3 + 0.8 * x)))).astype(float)
    X = np.column_stack([np.ones(20), x])
    q = quadrature_log_marginal(X, y)
    assert abs(log_marginal_laplace(X, y).log_marginal - q) / abs(q) <= 5e-3


def test_laplace_error_shrinks_like_one_over_n():
    # balanced intercept-only data: error in the log marginal decays at rate 1/n
    errs = []
    for n in (8, 32, 128):
        X, y = np.ones((n, 1)), np.r_[np.zeros(n // 2), np.ones(n // 2)]
        errs.append(abs(log_marginal_laplace(X, y).log_marginal - quadrature_log_marginal(X, y)))
    assert errs[0] > errs[1] > errs[2]
    assert 2.5 < errs[0] / errs[1] < 6 and 2.5 < errs[1] / errs[2] < 6


def test_rank_deficient_model_is_singular():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(40)
    X = np.column_stack([np.ones(40), x, 2 * x])
    with pytest.raises(SingularModelError):
        coefficient_prior(X)


def test_rank_check_is_scale_free():
    rng = np.random.default_rng(1)
    X = np.column_stack([np.ones(40), 1e-4 * rng.standard_normal(40), 1e5 * rng.standard_normal(40)])
    coefficient_prior(X)


def test_fit_model_uses_group_columns():
    rng = np.random.default_rng(4)
    n = 90
    z = rng.integers(0, 3, n)
    X = np.column_stack([np.ones(n), z == 1, z == 2, rng.standard_normal(n)]).astype(float)
    y = (rng.random(n) < 0.5).astype(float)
    data = DesignData(y, X, [np.array([1, 2]), np.array([3])])
    fit = fit_model(data, ModelIndicator.from_indices([0], 2))
    assert fit.beta_hat.shape == (3,)
    assert fit.log_marginal == pytest.approx(log_marginal_laplace(X[:, :3], y).log_marginal, abs=1e-12)
