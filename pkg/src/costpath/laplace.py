"""Bayesian logistic regression for one candidate model, with a Laplace
approximation to its integrated likelihood.

Coefficients get the prior ``N(0, 4n (X'X)^{-1})`` over the model's columns,
intercept included. The covariance is never inverted: the precision
``X'X / (4n)`` is used directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.special import expit

from .prior import ModelIndicator

__all__ = [
    "DesignData",
    "CoefficientPrior",
    "ModelFit",
    "SingularModelError",
    "model_design",
    "coefficient_prior",
    "log_joint",
    "log_joint_gradient",
    "neg_hessian",
    "newton_mode",
    "log_marginal_laplace",
    "fit_model",
    "GRAD_TOL",
    "MAX_ITER",
]

GRAD_TOL = 1e-8
MAX_ITER = 100
_LOG_2PI = math.log(2.0 * math.pi)


class SingularModelError(ValueError):
    """The model's design is rank deficient, so its coefficient prior does not exist."""


@dataclass
class DesignData:
    """Binary response plus the full expanded design.

    ``X_full[:, 0]`` is the intercept; ``column_groups[j]`` lists the
    expanded columns owned by predictor j.
    """

    y: np.ndarray
    X_full: np.ndarray
    column_groups: list[np.ndarray]
    names: list[str] | None = None

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        self.X_full = np.asarray(self.X_full, dtype=float)
        self.column_groups = [np.asarray(g, dtype=int) for g in self.column_groups]
        n, ncol = self.X_full.shape
        if self.y.shape != (n,):
            raise ValueError(f"y has shape {self.y.shape}, expected ({n},)")
        if not np.all((self.y == 0) | (self.y == 1)):
            raise ValueError("y must be binary 0/1")
        if not np.all(self.X_full[:, 0] == 1.0):
            raise ValueError("first column of X_full must be the intercept (all ones)")
        covered = np.concatenate(self.column_groups) if self.column_groups else np.array([], int)
        if sorted(covered.tolist()) != list(range(1, ncol)):
            raise ValueError("column groups must partition the non-intercept columns")
        if self.names is not None and len(self.names) != len(self.column_groups):
            raise ValueError("names and column_groups differ in length")

    @property
    def n(self) -> int:
        return self.X_full.shape[0]

    @property
    def p(self) -> int:
        return len(self.column_groups)

    def subset(self, rows) -> "DesignData":
        return DesignData(self.y[rows], self.X_full[rows], self.column_groups, self.names)


@dataclass(frozen=True)
class CoefficientPrior:
    """Zero-mean Gaussian prior held in precision form."""

    precision: np.ndarray
    chol: tuple = field(repr=False)
    logdet_precision: float

    @property
    def d(self) -> int:
        return self.precision.shape[0]

    def covariance(self) -> np.ndarray:
        return cho_solve(self.chol, np.eye(self.d))


@dataclass
class ModelFit:
    beta_hat: np.ndarray
    log_marginal: float
    neg_hessian_logdet: float
    newton_iters: int
    converged: bool
    log_joint_at_mode: float = float("nan")
    grad_maxnorm: float = float("nan")


def _gamma_array(gamma, p: int) -> np.ndarray:
    if isinstance(gamma, ModelIndicator):
        g = gamma.as_array()
    elif isinstance(gamma, (int, np.integer)):
        g = ModelIndicator.from_id(int(gamma), p).as_array()
    else:
        g = np.asarray(gamma, dtype=bool)
    if g.shape != (p,):
        raise ValueError(f"gamma has length {g.size}, data has {p} predictor groups")
    return g


def model_columns(data: DesignData, gamma) -> np.ndarray:
    g = _gamma_array(gamma, data.p)
    cols = [np.array([0])] + [data.column_groups[j] for j in np.flatnonzero(g)]
    return np.concatenate(cols)


def model_design(data: DesignData, gamma) -> tuple[np.ndarray, int]:
    """Intercept plus every included predictor's columns, in predictor order."""
    X = data.X_full[:, model_columns(data, gamma)]
    return X, X.shape[1]


def coefficient_prior(X: np.ndarray) -> CoefficientPrior:
    """Prior with precision ``X'X / (4n)``; raises :class:`SingularModelError` if not PD."""
    n = X.shape[0]
    P = X.T @ X / (4.0 * n)
    try:
        c = cho_factor(P, lower=True)
    except LinAlgError as exc:
        raise SingularModelError("X'X is not positive definite") from exc
    diag = np.diag(c[0])
    # Duplicated columns can slip past the factorization with roundoff-sized pivots;
    # pivots of the unit-diagonal rescaling are the scale-free test.
    scaled_pivots = diag / np.sqrt(np.diag(P))
    if np.min(scaled_pivots) <= 1e-7:
        raise SingularModelError("X'X is numerically rank deficient")
    return CoefficientPrior(P, c, 2.0 * float(np.sum(np.log(diag))))


def _softplus(eta: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, eta)


def log_likelihood(beta: np.ndarray, X: np.ndarray, y: np.ndarray) -> float:
    eta = X @ beta
    return float(np.sum(y * eta - _softplus(eta)))


def log_joint(beta, X: np.ndarray, y: np.ndarray, prior: CoefficientPrior) -> float:
    """Bernoulli log-likelihood plus the Gaussian log prior density at ``beta``."""
    beta = np.asarray(beta, dtype=float)
    d = prior.d
    quad = float(beta @ prior.precision @ beta)
    log_prior = -0.5 * d * _LOG_2PI + 0.5 * prior.logdet_precision - 0.5 * quad
    return log_likelihood(beta, X, y) + log_prior


def log_joint_gradient(beta, X: np.ndarray, y: np.ndarray, prior: CoefficientPrior) -> np.ndarray:
    beta = np.asarray(beta, dtype=float)
    return X.T @ (y - expit(X @ beta)) - prior.precision @ beta


def neg_hessian(beta, X: np.ndarray, prior: CoefficientPrior) -> np.ndarray:
    prob = expit(X @ np.asarray(beta, dtype=float))
    w = prob * (1.0 - prob)
    return (X * w[:, None]).T @ X + prior.precision


def newton_mode(
    X: np.ndarray,
    y: np.ndarray,
    prior: CoefficientPrior,
    grad_tol: float = GRAD_TOL,
    max_iter: int = MAX_ITER,
    trace: list | None = None,
):
    """Maximize the log joint by damped Newton-Raphson from ``beta = 0``.

    Returns ``(beta_hat, neg_hessian, iters, converged)``. Steps are halved
    until the log joint does not decrease; a drop within floating-point
    roundoff of the current value counts as no decrease. If ``trace`` is a
    list, accepted log-joint values are appended to it.
    """
    y = np.asarray(y, dtype=float)
    beta = np.zeros(X.shape[1])
    f = log_joint(beta, X, y, prior)
    if trace is not None:
        trace.append(f)
    iters = 0
    converged = False
    while True:
        g = log_joint_gradient(beta, X, y, prior)
        if np.max(np.abs(g)) <= grad_tol:
            converged = True
            break
        if iters >= max_iter:
            break
        H = neg_hessian(beta, X, prior)
        try:
            step = cho_solve(cho_factor(H, lower=True), g)
        except LinAlgError:
            break
        slack = 8.0 * np.finfo(float).eps * max(1.0, abs(f))
        t = 1.0
        for _ in range(60):
            cand = beta + t * step
            f_new = log_joint(cand, X, y, prior)
            if f_new >= f - slack:
                break
            t *= 0.5
        else:
            break
        beta, f = cand, f_new
        iters += 1
        if trace is not None:
            trace.append(f)
    return beta, neg_hessian(beta, X, prior), iters, converged


def log_marginal_laplace(X: np.ndarray, y: np.ndarray, prior: CoefficientPrior | None = None) -> ModelFit:
    """Laplace approximation ``log f(y, b*) + d/2 log 2pi - 1/2 log|H|`` at the posterior mode."""
    y = np.asarray(y, dtype=float)
    if prior is None:
        prior = coefficient_prior(X)
    beta, H, iters, converged = newton_mode(X, y, prior)
    try:
        cH = cho_factor(H, lower=True)
    except LinAlgError as exc:
        raise SingularModelError("negative Hessian is not positive definite") from exc
    logdet_H = 2.0 * float(np.sum(np.log(np.diag(cH[0]))))
    lj = log_joint(beta, X, y, prior)
    d = X.shape[1]
    log_ml = lj + 0.5 * d * _LOG_2PI - 0.5 * logdet_H
    gmax = float(np.max(np.abs(log_joint_gradient(beta, X, y, prior))))
    return ModelFit(beta, log_ml, logdet_H, iters, converged, lj, gmax)


def fit_model(data: DesignData, gamma) -> ModelFit:
    X, _ = model_design(data, gamma)
    return log_marginal_laplace(X, data.y)


def predict_proba(beta: np.ndarray, X: np.ndarray) -> np.ndarray:
    return expit(X @ beta)


def design_from_columns(y: Sequence[float], columns: Sequence[Sequence[float]]) -> DesignData:
    """All-numeric convenience constructor: one singleton group per column."""
    y = np.asarray(y, dtype=float)
    cols = [np.asarray(c, dtype=float) for c in columns]
    X = np.column_stack([np.ones(y.size)] + cols)
    return DesignData(y, X, [np.array([j + 1]) for j in range(len(cols))])
