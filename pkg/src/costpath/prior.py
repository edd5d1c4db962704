"""Cost schedules and cost-penalizing model priors.

A model is a length-p inclusion vector ``gamma`` (the intercept is always
in and never represented). The FND-family prior factorizes over
predictors: predictor j enters with probability

    q_j = n^{-(g_j - 1)/2} / (1 + n^{-(g_j - 1)/2})

where ``g_j = g(c_j / c0, b)`` is a cost-ratio function. Everything is
evaluated in log space because priors of 1e-29 are routine.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = [
    "CostSchedule",
    "ModelIndicator",
    "PriorFamily",
    "GKind",
    "PriorSpec",
    "cost_ratio_g",
    "log_model_prior",
    "log_model_priors",
    "prior_inclusion_probability",
    "load_cost_schedule",
]


@dataclass(frozen=True)
class CostSchedule:
    """Per-predictor marginal costs (cost units per observation)."""

    costs: tuple[float, ...]
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        costs = tuple(float(c) for c in self.costs)
        if not costs:
            raise ValueError("cost schedule is empty")
        for j, c in enumerate(costs):
            if not (c > 0 and math.isfinite(c)):
                raise ValueError(f"cost of predictor {j} must be positive and finite, got {c}")
        object.__setattr__(self, "costs", costs)
        if self.names is not None:
            names = tuple(self.names)
            if len(names) != len(costs):
                raise ValueError("names and costs differ in length")
            object.__setattr__(self, "names", names)

    @property
    def p(self) -> int:
        return len(self.costs)

    @property
    def c0(self) -> float:
        """Baseline cost, the cheapest predictor."""
        return min(self.costs)

    @property
    def ratios(self) -> np.ndarray:
        return np.asarray(self.costs) / self.c0

    def scaled(self, factor: float) -> "CostSchedule":
        return CostSchedule(tuple(c * factor for c in self.costs), self.names)


@dataclass(frozen=True)
class ModelIndicator:
    """Inclusion flags for the p candidate predictors.

    ``model_id`` is a bitmask with bit j set iff predictor j is included.
    """

    gamma: tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "gamma", tuple(bool(g) for g in self.gamma))

    @classmethod
    def from_id(cls, model_id: int, p: int) -> "ModelIndicator":
        if model_id < 0 or model_id >= 1 << p:
            raise ValueError(f"model_id {model_id} out of range for p={p}")
        return cls(tuple(bool((model_id >> j) & 1) for j in range(p)))

    @classmethod
    def from_indices(cls, indices: Sequence[int], p: int) -> "ModelIndicator":
        chosen = set(indices)
        return cls(tuple(j in chosen for j in range(p)))

    @property
    def p(self) -> int:
        return len(self.gamma)

    @property
    def model_id(self) -> int:
        return sum(1 << j for j, g in enumerate(self.gamma) if g)

    @property
    def indices(self) -> list[int]:
        return [j for j, g in enumerate(self.gamma) if g]

    @property
    def k(self) -> int:
        return sum(self.gamma)

    @property
    def bits(self) -> str:
        """0/1 string with predictor 1 leftmost."""
        return "".join("1" if g else "0" for g in self.gamma)

    @classmethod
    def from_bits(cls, bits: str) -> "ModelIndicator":
        if set(bits) - {"0", "1"}:
            raise ValueError(f"not a 0/1 string: {bits!r}")
        return cls(tuple(ch == "1" for ch in bits))

    def as_array(self) -> np.ndarray:
        return np.array(self.gamma, dtype=bool)


class PriorFamily(str, Enum):
    UNIFORM = "uniform"
    FND_FAMILY = "fnd_family"


class GKind(str, Enum):
    ECP = "ecp"
    LCP = "lcp"


@dataclass(frozen=True)
class PriorSpec:
    """Model-space prior: uniform, or FND-family with cost-ratio function ``g_kind`` and tuning ``b``."""

    family: PriorFamily = PriorFamily.UNIFORM
    g_kind: GKind = GKind.ECP
    b: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", PriorFamily(self.family))
        object.__setattr__(self, "g_kind", GKind(self.g_kind))
        if not (self.b >= 0 and math.isfinite(self.b)):
            raise ValueError(f"tuning parameter b must be a finite non-negative real, got {self.b}")

    @classmethod
    def uniform(cls) -> "PriorSpec":
        return cls(PriorFamily.UNIFORM)

    @classmethod
    def fnd(cls) -> "PriorSpec":
        return cls(PriorFamily.FND_FAMILY, GKind.ECP, 1.0)

    @classmethod
    def ecp(cls, b: float) -> "PriorSpec":
        return cls(PriorFamily.FND_FAMILY, GKind.ECP, b)

    @classmethod
    def lcp(cls, b: float) -> "PriorSpec":
        return cls(PriorFamily.FND_FAMILY, GKind.LCP, b)

    def label(self) -> str:
        if self.family is PriorFamily.UNIFORM:
            return "uniform"
        return f"{self.g_kind.value}(b={self.b:g})"


def cost_ratio_g(ratio, b: float, g_kind: GKind | str):
    """Adjusted cost ratio g(c_j/c0, b).

    ECP is ``ratio**b``; LCP is ``(ratio - 1) * b + 1``. Both equal 1 at
    ``b = 0`` or ``ratio = 1`` and equal ``ratio`` at ``b = 1``.
    Accepts a scalar or an array of ratios.
    """
    g_kind = GKind(g_kind)
    r = np.asarray(ratio, dtype=float)
    if np.any(r < 1) or np.any(~np.isfinite(r)):
        raise ValueError(f"cost ratio must be >= 1, got {ratio}")
    if not (b >= 0 and math.isfinite(b)):
        raise ValueError(f"b must be >= 0, got {b}")
    if g_kind is GKind.ECP:
        out = r**b
    else:
        out = (r - 1.0) * b + 1.0
    return float(out) if out.ndim == 0 else out


def _log_q(costs: CostSchedule, n: int, spec: PriorSpec) -> tuple[np.ndarray, np.ndarray]:
    """Log prior inclusion / exclusion probabilities per predictor."""
    p = costs.p
    if spec.family is PriorFamily.UNIFORM:
        # same arithmetic as g = 1, so b = 0 and uniform agree bit for bit
        t = np.zeros(p)
        log_denom = np.logaddexp(0.0, t)
        return t - log_denom, -log_denom
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    g = np.atleast_1d(cost_ratio_g(costs.ratios, spec.b, spec.g_kind))
    # t_j = log n^{-(g_j - 1)/2}; log q_j = t_j - log(1 + e^{t_j}); log(1 - q_j) = -log(1 + e^{t_j})
    t = -0.5 * (g - 1.0) * math.log(n)
    log_denom = np.logaddexp(0.0, t)
    return t - log_denom, -log_denom


def log_model_prior(gamma, costs: CostSchedule, n: int, spec: PriorSpec) -> float:
    """Natural-log prior probability of one model."""
    g = gamma.as_array() if isinstance(gamma, ModelIndicator) else np.asarray(gamma, dtype=bool)
    if g.shape != (costs.p,):
        raise ValueError(f"gamma has length {g.size}, cost schedule has {costs.p}")
    log_in, log_out = _log_q(costs, n, spec)
    return float(np.where(g, log_in, log_out).sum())


def log_model_priors(model_ids: np.ndarray, costs: CostSchedule, n: int, spec: PriorSpec) -> np.ndarray:
    """Vectorized :func:`log_model_prior` over integer model ids."""
    ids = np.asarray(model_ids, dtype=np.int64)
    log_in, log_out = _log_q(costs, n, spec)
    bits = (ids[:, None] >> np.arange(costs.p)) & 1
    return np.where(bits.astype(bool), log_in, log_out).sum(axis=1)


def prior_inclusion_probability(j: int, costs: CostSchedule, n: int, spec: PriorSpec) -> float:
    if not 0 <= j < costs.p:
        raise IndexError(f"predictor index {j} out of range for p={costs.p}")
    log_in, _ = _log_q(costs, n, spec)
    return float(math.exp(log_in[j]))


def load_cost_schedule(path) -> CostSchedule:
    """Read a ``predictor,cost`` CSV (header required)."""
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:2]] != ["predictor", "cost"]:
            raise ValueError(f"{path}: expected header 'predictor,cost', got {header}")
        names, costs = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or not "".join(row).strip():
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
            try:
                cost = float(row[1])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: cost {row[1]!r} is not a number") from None
            names.append(row[0].strip())
            costs.append(cost)
    return CostSchedule(tuple(costs), tuple(names))
