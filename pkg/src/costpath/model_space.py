"""Full enumeration of the 2^p model space.

Integrated likelihoods do not depend on the model prior, so they are
computed once (:func:`fit_all_models`) and reused by every prior that is
applied afterwards (:func:`posterior_from_fits`).
"""

from __future__ import annotations

import csv
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import logsumexp

from .laplace import DesignData, SingularModelError, fit_model, model_design, predict_proba
from .metrics import c_statistic
from .prior import CostSchedule, ModelIndicator, PriorSpec, log_model_priors

__all__ = [
    "MAX_ENUMERATION_P",
    "EnumerationTooLarge",
    "ModelFits",
    "PosteriorTable",
    "SelectionSummary",
    "resolve_threads",
    "fit_all_models",
    "posterior_from_fits",
    "enumerate_posterior",
    "bayes_factor",
    "posterior_inclusion_probabilities",
    "map_model",
    "median_probability_model",
    "model_cost",
    "in_sample_cstat",
    "summarize",
    "write_models_csv",
    "read_models_csv",
]

log = logging.getLogger(__name__)

MAX_ENUMERATION_P = 25
_CHUNK = 256


class EnumerationTooLarge(ValueError):
    pass


def resolve_threads(threads: int | None = None) -> int:
    """Worker count: explicit value, else ``COSTPATH_THREADS``, else 1."""
    if threads is None:
        env = os.environ.get("COSTPATH_THREADS")
        threads = int(env) if env else 1
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    return threads


@dataclass
class ModelFits:
    """Prior-independent Laplace fits for every model, indexed by model_id."""

    data: DesignData
    log_marginal: np.ndarray
    betas: list
    excluded: list[tuple[int, str]] = field(default_factory=list)

    @property
    def p(self) -> int:
        return self.data.p

    @property
    def n(self) -> int:
        return self.data.n

    @property
    def included(self) -> np.ndarray:
        return np.isfinite(self.log_marginal)


def _fit_chunk(data: DesignData, ids: range):
    out = []
    for m in ids:
        try:
            fit = fit_model(data, m)
        except SingularModelError as exc:
            out.append((m, None, None, f"singular: {exc}"))
            continue
        if not fit.converged:
            out.append((m, None, None, f"not converged after {fit.newton_iters} Newton iterations"))
            continue
        out.append((m, fit.log_marginal, fit.beta_hat, None))
    return out


def fit_all_models(data: DesignData, threads: int | None = None) -> ModelFits:
    """Laplace-fit all 2^p models, fanning chunks out to ``threads`` processes.

    Chunks are reassembled in model_id order, so results do not depend on
    the worker count.
    """
    p = data.p
    if p > MAX_ENUMERATION_P:
        raise EnumerationTooLarge(
            f"p={p} exceeds the enumeration limit of {MAX_ENUMERATION_P} predictors; "
            "a stochastic model-space search is needed for problems this large and is not provided"
        )
    K = 1 << p
    chunks = [range(s, min(s + _CHUNK, K)) for s in range(0, K, _CHUNK)]
    threads = resolve_threads(threads)
    if threads == 1 or len(chunks) == 1:
        results = [_fit_chunk(data, c) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_fit_chunk, [data] * len(chunks), chunks))
    log_ml = np.full(K, np.nan)
    betas: list = [None] * K
    excluded = []
    for chunk in results:
        for m, lm, beta, reason in chunk:
            if reason is not None:
                excluded.append((m, reason))
                log.warning("model %d excluded: %s", m, reason)
            else:
                log_ml[m] = lm
                betas[m] = beta
    if not np.any(np.isfinite(log_ml)):
        raise RuntimeError("every model was excluded; the posterior is undefined")
    return ModelFits(data, log_ml, betas, excluded)


@dataclass(frozen=True)
class PosteriorTable:
    """Every model's log prior, log marginal and posterior probability.

    Rows are indexed by model_id (ascending). Excluded models carry
    ``log_marginal = nan`` and ``post_prob = 0``.
    """

    model_ids: np.ndarray
    log_prior: np.ndarray
    log_marginal: np.ndarray
    post_prob: np.ndarray
    n: int
    p: int
    spec: PriorSpec
    costs: CostSchedule
    excluded: tuple[tuple[int, str], ...] = ()
    fits: ModelFits | None = field(default=None, repr=False, compare=False)

    @property
    def included(self) -> np.ndarray:
        return np.isfinite(self.log_marginal)

    def row(self, model_id: int) -> dict:
        return {
            "model_id": int(model_id),
            "log_prior": float(self.log_prior[model_id]),
            "log_marginal": float(self.log_marginal[model_id]),
            "post_prob": float(self.post_prob[model_id]),
        }

    def inclusion_bits(self) -> np.ndarray:
        """(2^p, p) 0/1 matrix; bit j of row m is gamma_j of model m."""
        return ((self.model_ids[:, None] >> np.arange(self.p)) & 1).astype(float)


def posterior_from_fits(fits: ModelFits, costs: CostSchedule, spec: PriorSpec) -> PosteriorTable:
    if costs.p != fits.p:
        raise ValueError(f"cost schedule has {costs.p} predictors, data has {fits.p}")
    K = 1 << fits.p
    ids = np.arange(K, dtype=np.int64)
    lp = log_model_priors(ids, costs, fits.n, spec)
    inc = fits.included
    num = lp + fits.log_marginal
    post = np.zeros(K)
    post[inc] = np.exp(num[inc] - logsumexp(num[inc]))
    return PosteriorTable(ids, lp, fits.log_marginal.copy(), post, fits.n, fits.p, spec, costs,
                          tuple(fits.excluded), fits)


def enumerate_posterior(
    data: DesignData,
    costs: CostSchedule,
    spec: PriorSpec,
    fits: ModelFits | None = None,
    threads: int | None = None,
) -> PosteriorTable:
    """Posterior probabilities of all 2^p models under ``spec``."""
    if data.p > MAX_ENUMERATION_P:
        fit_all_models(data)  # raises with the explanatory message
    if fits is None:
        fits = fit_all_models(data, threads)
    return posterior_from_fits(fits, costs, spec)


def bayes_factor(table: PosteriorTable, id1: int, id2: int) -> float:
    """``p(Y|M1) / p(Y|M2)``; independent of the model prior."""
    for m in (id1, id2):
        if not table.included[m]:
            raise ValueError(f"model {m} was excluded from the table")
    return math.exp(table.log_marginal[id1] - table.log_marginal[id2])


def posterior_inclusion_probabilities(table: PosteriorTable) -> np.ndarray:
    return table.inclusion_bits().T @ table.post_prob


def map_model(table: PosteriorTable) -> ModelIndicator:
    """Highest-posterior model; exact ties go to the smallest model_id."""
    return ModelIndicator.from_id(int(np.argmax(table.post_prob)), table.p)


def median_probability_model(pips, threshold: float = 0.5) -> ModelIndicator:
    return ModelIndicator(tuple(float(q) >= threshold for q in pips))


def model_cost(gamma, costs: CostSchedule, n: int | None = None) -> tuple[float, float | None]:
    """Per-observation cost and, if ``n`` is given, the total over n observations."""
    g = gamma.as_array() if isinstance(gamma, ModelIndicator) else np.asarray(gamma, dtype=bool)
    if g.shape != (costs.p,):
        raise ValueError(f"gamma has length {g.size}, cost schedule has {costs.p}")
    per_obs = float(sum(c for c, inc in zip(costs.costs, g) if inc))
    return per_obs, (None if n is None else n * per_obs)


def in_sample_cstat(data: DesignData, gamma, beta: np.ndarray | None = None) -> float:
    """C-statistic of fitted probabilities at the model's posterior mode."""
    X, _ = model_design(data, gamma)
    if beta is None:
        beta = fit_model(data, gamma).beta_hat
    return c_statistic(predict_proba(beta, X), data.y)


@dataclass(frozen=True)
class SelectionSummary:
    map_model: ModelIndicator
    median_model: ModelIndicator
    pips: tuple[float, ...]
    map_cost: float
    median_cost: float
    map_cstat: float
    median_cstat: float
    map_post_prob: float
    median_post_prob: float


def _cstat_for(table: PosteriorTable, gamma: ModelIndicator) -> float:
    fits = table.fits
    if fits is None:
        raise ValueError("table carries no fits; C-statistics need the data")
    beta = fits.betas[gamma.model_id]
    return in_sample_cstat(fits.data, gamma, beta)


def summarize(table: PosteriorTable, threshold: float = 0.5) -> SelectionSummary:
    pips = posterior_inclusion_probabilities(table)
    mp = map_model(table)
    med = median_probability_model(pips, threshold)
    return SelectionSummary(
        map_model=mp,
        median_model=med,
        pips=tuple(float(q) for q in pips),
        map_cost=model_cost(mp, table.costs)[0],
        median_cost=model_cost(med, table.costs)[0],
        map_cstat=_cstat_for(table, mp),
        median_cstat=_cstat_for(table, med),
        map_post_prob=float(table.post_prob[mp.model_id]),
        median_post_prob=float(table.post_prob[med.model_id]),
    )


MODELS_CSV_FIELDS = ("model_id", "gamma_bits", "k", "cost_per_obs", "log_prior", "log_marginal", "post_prob")


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def write_models_csv(table: PosteriorTable, path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(MODELS_CSV_FIELDS)
        for m in table.model_ids:
            gamma = ModelIndicator.from_id(int(m), table.p)
            w.writerow([
                int(m), gamma.bits, gamma.k, _g17(model_cost(gamma, table.costs)[0]),
                _g17(table.log_prior[m]), _g17(table.log_marginal[m]), _g17(table.post_prob[m]),
            ])
    return path


def read_models_csv(path) -> dict[str, np.ndarray]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    out = {"model_id": np.array([int(r["model_id"]) for r in rows]),
           "gamma_bits": np.array([r["gamma_bits"] for r in rows])}
    for key in ("k",):
        out[key] = np.array([int(r[key]) for r in rows])
    for key in ("cost_per_obs", "log_prior", "log_marginal", "post_prob"):
        out[key] = np.array([float(r[key]) for r in rows])
    return out
