import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from costpath.laplace import design_from_columns
from costpath.metrics import (
    StratificationError,
    UndefinedMetricError,
    c_statistic,
    cv_cstatistic,
    cv_fold_assignment,
    kl_divergence,
    kl_vs_n_experiment,
    roc_curve,
    write_cv_csv,
)
from costpath.model_space import posterior_from_fits
from costpath.prior import PriorSpec
from oracles import pairwise_cstat


def random_instance(rng):
    n = int(rng.integers(2, 201))
    y = rng.integers(0, 2, n)
    y[0], y[1] = 0, 1
    # coarse rounding forces ties
    s = np.round(rng.normal(y * rng.uniform(0, 2), 1.0), int(rng.integers(0, 3)))
    return s, y


# --- C-statistic -----------------------------------------------------------

@pytest.mark.parametrize("scores, labels, expected", [
    ((0.9, 0.8, 0.3, 0.2), (1, 1, 0, 0), 1.0),
    ((0.9, 0.2, 0.8, 0.3), (1, 0, 0, 1), 0.75),
    ((0.4, 0.4, 0.4), (1, 0, 1), 0.5),
])
def test_cstat_examples(scores, labels, expected):
    assert c_statistic(scores, labels) == expected


def test_cstat_matches_pairwise_oracle():
    rng = np.random.default_rng(7)
    for _ in range(100):
        s, y = random_instance(rng)
        assert abs(c_statistic(s, y) - pairwise_cstat(s, y)) <= 1e-12


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1))
def test_cstat_monotone_transform_invariance(seed):
    rng = np.random.default_rng(seed)
    s, y = random_instance(rng)
    assert c_statistic(np.exp(3 * s) + 1, y) == c_statistic(s, y)


def test_cstat_single_class():
    with pytest.raises(UndefinedMetricError):
        c_statistic([0.1, 0.2], [1, 1])


def test_roc_curve_shape_and_area():
    rng = np.random.default_rng(8)
    for _ in range(50):
        s, y = random_instance(rng)
        roc = roc_curve(s, y)
        assert (roc.fpr[0], roc.tpr[0]) == (0, 0) and (roc.fpr[-1], roc.tpr[-1]) == (1, 1)
        assert np.all(np.diff(roc.fpr) >= 0) and np.all(np.diff(roc.tpr) >= 0)
        assert abs(roc.area() - c_statistic(s, y)) <= 1e-9


# --- KL divergence ---------------------------------------------------------

def test_kl_examples():
    assert kl_divergence([0.3, 0.7], [0.3, 0.7]) == 0
    assert kl_divergence([1, 0], [0.5, 0.5]) == pytest.approx(math.log(2), abs=1e-15)
    assert kl_divergence([0.5, 0.5], [1, 0]) == math.inf


def test_kl_gibbs_and_asymmetry():
    rng = np.random.default_rng(9)
    asym = 0
    for _ in range(500):
        k = int(rng.integers(2, 10))
        P, Q = rng.dirichlet(np.ones(k)), rng.dirichlet(np.ones(k))
        a, b = kl_divergence(P, Q), kl_divergence(Q, P)
        assert a >= 0 and b >= 0
        asym += abs(a - b) > 1e-9
    assert asym > 400


def test_kl_input_checks():
    with pytest.raises(ValueError):
        kl_divergence([0.5, 0.6], [0.5, 0.5])
    with pytest.raises(ValueError):
        kl_divergence([1.0], [0.5, 0.5])


def test_kl_of_table_against_itself(sim_small):
    _, costs, fits = sim_small
    t = posterior_from_fits(fits, costs, PriorSpec.fnd())
    assert kl_divergence(t.post_prob, t.post_prob) == 0


def test_kl_experiment_shape():
    rows = kl_vs_n_experiment(reps=2, n0=150, step=300, n_max=450, seed=3)
    assert [(r, n) for r, n, _ in rows] == [(0, 150), (0, 450), (1, 150), (1, 450)]
    assert all(kl >= 0 for _, _, kl in rows)
    with pytest.raises(ValueError):
        kl_vs_n_experiment(reps=1, n0=10)


# --- cross-validation ------------------------------------------------------

def test_fold_assignment_balanced_and_seeded():
    y = np.r_[np.zeros(30), np.ones(27)]
    a = cv_fold_assignment(y, 10, seed=4)
    np.testing.assert_array_equal(a, cv_fold_assignment(y, 10, seed=4))
    sizes = np.bincount(a)
    assert sizes.max() - sizes.min() <= 1
    for f in range(10):
        assert 0 < y[a == f].sum() < np.sum(a == f)


def test_fold_assignment_gives_up():
    y = np.r_[np.ones(3), np.zeros(40)]
    with pytest.raises(StratificationError):
        cv_fold_assignment(y, 10, seed=0)


def test_cv_reproducible(cleveland, tmp_path):
    data = cleveland[0]
    a = cv_cstatistic(data, 0b1111, seed=5)
    b = cv_cstatistic(data, 0b1111, seed=5)
    assert a.fold_cstats == b.fold_cstats
    assert a.mean == pytest.approx(np.mean(a.fold_cstats), abs=1e-15)
    assert all(0 <= c <= 1 for c in a.fold_cstats)
    text = write_cv_csv(a, tmp_path / "cv.csv").read_text()
    assert text.splitlines()[0] == "fold,cstat" and len(text.splitlines()) == 13


def test_cv_perfect_separation():
    x = np.r_[np.linspace(-3, -1, 30), np.linspace(1, 3, 30)]
    y = (x > 0).astype(int)
    report = cv_cstatistic(design_from_columns(y, [x]), 1, seed=0)
    assert report.fold_cstats == (1.0,) * 10
