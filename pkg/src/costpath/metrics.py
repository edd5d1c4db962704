"""Discrimination and divergence metrics, cross-validated C-statistics and
the KL-versus-sample-size experiment."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from .laplace import DesignData, coefficient_prior, model_design, newton_mode, predict_proba

__all__ = [
    "UndefinedMetricError",
    "StratificationError",
    "RocCurve",
    "CvReport",
    "c_statistic",
    "roc_curve",
    "kl_divergence",
    "cv_fold_assignment",
    "cv_cstatistic",
    "kl_vs_n_experiment",
    "write_roc_csv",
    "write_cv_csv",
    "write_kl_csv",
]


class UndefinedMetricError(ValueError):
    pass


class StratificationError(ValueError):
    pass


def _check_labels(labels: np.ndarray) -> tuple[int, int]:
    if not np.all((labels == 0) | (labels == 1)):
        raise ValueError("labels must be 0/1")
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("C-statistic needs at least one positive and one negative label")
    return n_pos, n_neg


def c_statistic(scores, labels) -> float:
    """Area under the ROC curve via the Mann-Whitney rank-sum; ties count 1/2."""
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=float)
    if s.shape != y.shape:
        raise ValueError("scores and labels differ in shape")
    n_pos, n_neg = _check_labels(y)
    ranks = rankdata(s)  # midranks for ties
    u = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray

    def area(self) -> float:
        return float(np.trapezoid(self.tpr, self.fpr))


def roc_curve(scores, labels) -> RocCurve:
    """ROC points from (0, 0) to (1, 1), one per distinct score threshold."""
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=float)
    n_pos, n_neg = _check_labels(y)
    order = np.argsort(-s, kind="mergesort")
    s, y = s[order], y[order]
    # last index of each run of equal scores
    ends = np.r_[np.flatnonzero(np.diff(s)), s.size - 1]
    tp = np.cumsum(y)[ends]
    fp = (ends + 1) - tp
    fpr = np.r_[0.0, fp / n_neg]
    tpr = np.r_[0.0, tp / n_pos]
    return RocCurve(fpr, tpr, np.r_[np.inf, s[ends]])


def kl_divergence(P, Q, atol: float = 1e-8) -> float:
    """``sum P log(P/Q)`` with ``0 log 0 = 0``; ``inf`` when P is not absolutely continuous w.r.t. Q."""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if P.shape != Q.shape:
        raise ValueError("P and Q differ in length")
    if np.any(P < 0) or np.any(Q < 0):
        raise ValueError("probabilities must be non-negative")
    for name, v in (("P", P), ("Q", Q)):
        if abs(v.sum() - 1.0) > atol:
            raise ValueError(f"{name} sums to {v.sum()}, not 1")
    pos = P > 0
    if np.any(Q[pos] == 0):
        return math.inf
    return float(max(0.0, np.sum(P[pos] * (np.log(P[pos]) - np.log(Q[pos])))))


@dataclass(frozen=True)
class CvReport:
    fold_cstats: tuple[float, ...]
    mean: float
    std: float
    seed: int
    folds: np.ndarray  # fold index per observation

    @classmethod
    def from_folds(cls, cstats: Sequence[float], seed: int, folds: np.ndarray) -> "CvReport":
        arr = np.asarray(cstats, dtype=float)
        return cls(tuple(arr.tolist()), float(arr.mean()), float(arr.std(ddof=1)) if arr.size > 1 else 0.0,
                   seed, folds)


def cv_fold_assignment(y, folds: int = 10, seed: int = 0, max_tries: int = 20) -> np.ndarray:
    """Seeded shuffle, then round-robin fold labels; reshuffle until every
    fold holds both classes."""
    y = np.asarray(y)
    n = y.size
    if folds < 2 or folds > n:
        raise ValueError(f"folds must be in [2, n], got {folds}")
    base = np.arange(n) % folds
    for attempt in range(max_tries):
        rng = np.random.default_rng([seed, attempt])
        assign = np.empty(n, dtype=int)
        assign[rng.permutation(n)] = base
        if all(0 < y[assign == f].sum() < np.sum(assign == f) for f in range(folds)):
            return assign
    raise StratificationError(f"could not find a {folds}-fold split with both classes in every fold "
                              f"after {max_tries} shuffles")


def cv_cstatistic(data: DesignData, gamma, folds: int = 10, seed: int = 0) -> CvReport:
    """K-fold predictive C-statistic for one model.

    Each fold is predicted from the posterior mode fitted on the other
    folds, with the coefficient prior rebuilt from the training rows.
    """
    assign = cv_fold_assignment(data.y, folds, seed)
    X, _ = model_design(data, gamma)
    stats = []
    for f in range(folds):
        train, test = assign != f, assign == f
        prior = coefficient_prior(X[train])
        beta, _, _, _ = newton_mode(X[train], data.y[train], prior)
        stats.append(c_statistic(predict_proba(beta, X[test]), data.y[test]))
    return CvReport.from_folds(stats, seed, assign)


def kl_vs_n_experiment(
    reps: int = 10,
    n0: int = 150,
    step: int = 300,
    n_max: int = 2550,
    seed: int = 0,
    threads: int | None = None,
) -> list[tuple[int, int, float]]:
    """KL(FND posterior || uniform posterior) as simulated data sets grow.

    Rep ``r`` draws from its own positional stream, so each larger data
    set contains the smaller ones. Returns ``(rep, n, kl)`` rows.
    """
    from .data_io import SimulationConfig, grow_dataset, simulate_dataset
    from .model_space import fit_all_models, posterior_from_fits
    from .prior import PriorSpec

    p = len(SimulationConfig().costs)
    if n0 < p + 10:
        raise ValueError(f"n0 must be at least p + 10 = {p + 10}")
    if step <= 0 or n_max < n0:
        raise ValueError("need step > 0 and n_max >= n0")
    rows = []
    for rep in range(reps):
        rep_seed = int(np.random.SeedSequence([seed, rep]).generate_state(1, np.uint64)[0])
        config = SimulationConfig(n=n0, seed=rep_seed)
        data, costs = simulate_dataset(config)
        n = n0
        while True:
            try:
                fits = fit_all_models(data, threads)
                fnd = posterior_from_fits(fits, costs, PriorSpec.fnd()).post_prob
                unif = posterior_from_fits(fits, costs, PriorSpec.uniform()).post_prob
            except Exception as exc:
                raise RuntimeError(f"KL experiment failed at rep={rep}, n={n}: {exc}") from exc
            rows.append((rep, n, kl_divergence(fnd, unif)))
            if n + step > n_max:
                break
            data = grow_dataset(data, step, rep_seed, config)
            n += step
    return rows


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def write_roc_csv(curve: RocCurve, path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["fpr", "tpr"])
        for a, b in zip(curve.fpr, curve.tpr):
            w.writerow([_g17(a), _g17(b)])
    return path


def write_cv_csv(report: CvReport, path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["fold", "cstat"])
        for i, c in enumerate(report.fold_cstats, start=1):
            w.writerow([i, _g17(c)])
        w.writerow(["mean", _g17(report.mean)])
        w.writerow(["sd", _g17(report.std)])
    return path


def write_kl_csv(rows, path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["rep", "n", "kl"])
        for rep, n, kl in rows:
            w.writerow([rep, n, _g17(kl)])
    return path
