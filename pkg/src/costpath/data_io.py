"""Dataset loading (generic CSV + JSON predictor spec, raw Cleveland file)
and the simulation generator.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.special import expit, ndtri

from .laplace import DesignData
from .prior import CostSchedule

__all__ = [
    "PredictorSpec",
    "SimulationConfig",
    "DataFormatError",
    "build_design",
    "load_dataset",
    "load_cleveland",
    "cleveland_path",
    "cleveland_predictors",
    "simulate_dataset",
    "grow_dataset",
    "SIM_BETA",
    "SIM_COSTS",
]

log = logging.getLogger(__name__)

MISSING = {"", "?", "na", "nan", "null"}


class DataFormatError(ValueError):
    pass


@dataclass(frozen=True)
class PredictorSpec:
    """One candidate predictor.

    Categorical predictors expand to one dummy per non-reference level and
    enter or leave a model as a block. ``levels`` are the raw codes as they
    appear in the data; ``labels`` (optional) are display names.
    """

    name: str
    kind: str
    cost: float
    levels: tuple[str, ...] = ()
    reference: str | None = None
    column: str | None = None
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("numeric", "categorical"):
            raise ValueError(f"{self.name}: kind must be 'numeric' or 'categorical', got {self.kind!r}")
        if not (self.cost > 0 and math.isfinite(self.cost)):
            raise ValueError(f"{self.name}: cost must be positive, got {self.cost}")
        if self.kind == "categorical":
            levels = tuple(str(v) for v in self.levels)
            if len(levels) < 2:
                raise ValueError(f"{self.name}: categorical predictor needs at least 2 levels")
            ref = levels[0] if self.reference is None else str(self.reference)
            if ref not in levels:
                raise ValueError(f"{self.name}: reference level {ref!r} not among levels {levels}")
            object.__setattr__(self, "levels", levels)
            object.__setattr__(self, "reference", ref)

    @property
    def source(self) -> str:
        return self.column or self.name

    @property
    def n_columns(self) -> int:
        return 1 if self.kind == "numeric" else len(self.levels) - 1

    @property
    def dummy_levels(self) -> tuple[str, ...]:
        return tuple(v for v in self.levels if v != self.reference)


def _match_level(token: str, levels: Sequence[str]) -> int | None:
    if token in levels:
        return levels.index(token)
    try:
        x = float(token)
    except ValueError:
        return None
    for i, lv in enumerate(levels):
        try:
            if float(lv) == x:
                return i
        except ValueError:
            continue
    return None


def build_design(
    columns: Mapping[str, Sequence[str]],
    response: str,
    predictors: Sequence[PredictorSpec],
    source: str = "<data>",
    first_line: int = 2,
) -> DesignData:
    """Expand raw string columns into a grouped design matrix.

    Rows with a missing value in the response or any predictor are dropped.
    """
    for name in [response] + [s.source for s in predictors]:
        if name not in columns:
            raise DataFormatError(f"{source}: column {name!r} not found")
    n_raw = len(columns[response])
    keep = []
    for i in range(n_raw):
        if any(columns[c][i].strip().lower() in MISSING for c in [response] + [s.source for s in predictors]):
            continue
        keep.append(i)
    dropped = n_raw - len(keep)
    if dropped:
        log.info("%s: dropped %d of %d rows with missing values", source, dropped, n_raw)

    y = np.empty(len(keep))
    for r, i in enumerate(keep):
        tok = columns[response][i].strip()
        try:
            v = float(tok)
        except ValueError:
            v = float("nan")
        if v not in (0.0, 1.0):
            raise DataFormatError(
                f"{source}: line {first_line + i}, column {response!r}: response must be 0 or 1, got {tok!r}"
            )
        y[r] = v

    blocks = [np.ones((len(keep), 1))]
    groups = []
    next_col = 1
    for spec in predictors:
        raw = columns[spec.source]
        if spec.kind == "numeric":
            block = np.empty((len(keep), 1))
            for r, i in enumerate(keep):
                try:
                    block[r, 0] = float(raw[i])
                except ValueError:
                    raise DataFormatError(
                        f"{source}: line {first_line + i}, column {spec.source!r}: not a number: {raw[i]!r}"
                    ) from None
        else:
            dummies = spec.dummy_levels
            block = np.zeros((len(keep), len(dummies)))
            for r, i in enumerate(keep):
                k = _match_level(raw[i].strip(), spec.levels)
                if k is None:
                    raise DataFormatError(
                        f"{source}: line {first_line + i}, column {spec.source!r}: "
                        f"unknown level {raw[i]!r} (levels {list(spec.levels)})"
                    )
                level = spec.levels[k]
                if level != spec.reference:
                    block[r, dummies.index(level)] = 1.0
        blocks.append(block)
        groups.append(np.arange(next_col, next_col + block.shape[1]))
        next_col += block.shape[1]
    return DesignData(y, np.hstack(blocks), groups, [s.name for s in predictors])


def _predictors_from_json(spec: dict, source: str) -> tuple[str, list[PredictorSpec]]:
    if "response" not in spec or "predictors" not in spec:
        raise DataFormatError(f"{source}: spec needs 'response' and 'predictors' sections")
    response = spec["response"]
    if isinstance(response, dict):
        response = response["name"]
    preds = []
    for k, entry in enumerate(spec["predictors"]):
        if "cost" not in entry:
            raise DataFormatError(f"{source}: predictor #{k} ({entry.get('name')!r}) has no cost")
        try:
            preds.append(
                PredictorSpec(
                    name=entry["name"],
                    kind=entry.get("kind", "numeric"),
                    cost=float(entry["cost"]),
                    levels=tuple(str(v) for v in entry.get("levels", ())),
                    reference=None if entry.get("reference") is None else str(entry["reference"]),
                    column=entry.get("column"),
                    labels=tuple(entry["labels"]) if entry.get("labels") else None,
                )
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise DataFormatError(f"{source}: predictor #{k}: {exc}") from None
    return str(response), preds


def load_dataset(data_path, spec_path) -> tuple[DesignData, CostSchedule, list[PredictorSpec]]:
    """Load a headed CSV using a JSON predictor spec.

    Spec layout::

        {"response": "y",
         "predictors": [{"name": "age", "kind": "numeric", "cost": 1.0},
                        {"name": "cp", "kind": "categorical", "levels": ["1", "2", "3", "4"],
                         "reference": "1", "cost": 1.0}]}
    """
    spec_path = Path(spec_path)
    with spec_path.open(encoding="utf-8") as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{spec_path}: {exc}") from None
    response, preds = _predictors_from_json(spec, str(spec_path))
    data_path = Path(data_path)
    with data_path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise DataFormatError(f"{data_path}: empty file")
        header = [h.strip() for h in header]
        cols: dict[str, list[str]] = {h: [] for h in header}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataFormatError(f"{data_path}: line {lineno}: expected {len(header)} fields, got {len(row)}")
            for h, v in zip(header, row):
                cols[h].append(v)
    data = build_design(cols, response, preds, source=str(data_path))
    costs = CostSchedule(tuple(s.cost for s in preds), tuple(s.name for s in preds))
    return data, costs, preds


# Raw UCI processed.cleveland.data field order.
CLEVELAND_FIELDS = (
    "age", "sex", "cp", "trestbps", "chol", "fbs", "restecg",
    "thalach", "exang", "oldpeak", "slope", "ca", "thal", "num",
)


def cleveland_predictors() -> list[PredictorSpec]:
    """The 13 Cleveland predictors with their per-patient costs (CAD)."""
    cat = "categorical"
    return [
        PredictorSpec("age", "numeric", 1.00, column="age"),
        PredictorSpec("sex", cat, 1.00, ("0", "1"), "0", "sex", ("female", "male")),
        PredictorSpec("chest_pain", cat, 1.00, ("1", "2", "3", "4"), "1", "cp",
                      ("typical angina", "atypical angina", "non-anginal pain", "asymptomatic")),
        PredictorSpec("resting_bp", "numeric", 1.00, column="trestbps"),
        PredictorSpec("cholesterol", "numeric", 7.27, column="chol"),
        PredictorSpec("blood_sugar", cat, 5.20, ("0", "1"), "0", "fbs", ("false", "true")),
        PredictorSpec("ekg", cat, 15.50, ("0", "1", "2"), "0", "restecg",
                      ("normal", "ST-T wave abnormality", "probable/definite left")),
        PredictorSpec("heart_rate", "numeric", 102.90, column="thalach"),
        PredictorSpec("exercise_angina", cat, 87.30, ("0", "1"), "0", "exang", ("no", "yes")),
        PredictorSpec("st_depression", "numeric", 87.30, column="oldpeak"),
        PredictorSpec("peak_st_segment", cat, 87.30, ("1", "2", "3"), "1", "slope",
                      ("upsloping", "flat", "downsloping")),
        PredictorSpec("major_vessels", cat, 100.90, ("0", "1", "2", "3"), "0", "ca"),
        PredictorSpec("defect_type", cat, 102.90, ("3", "6", "7"), "3", "thal",
                      ("normal", "fixed defect", "reversible defect")),
    ]


def cleveland_path() -> Path:
    """Bundled copy of the raw processed Cleveland file."""
    return Path(str(resources.files("costpath") / "data" / "processed.cleveland.data"))


def load_cleveland(path=None) -> tuple[DesignData, CostSchedule, list[PredictorSpec]]:
    """Load the raw 14-field Cleveland file; response is ``num >= 1``."""
    path = cleveland_path() if path is None else Path(path)
    cols: dict[str, list[str]] = {f: [] for f in CLEVELAND_FIELDS}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = [f.strip() for f in line.split(",")]
            if len(fields) != len(CLEVELAND_FIELDS):
                raise DataFormatError(f"{path}: line {lineno}: expected 14 fields, got {len(fields)}")
            num = fields[-1]
            if num not in MISSING:
                try:
                    fields[-1] = "1" if float(num) >= 1 else "0"
                except ValueError:
                    raise DataFormatError(f"{path}: line {lineno}: bad disease field {num!r}") from None
            for f, v in zip(CLEVELAND_FIELDS, fields):
                cols[f].append(v)
    preds = cleveland_predictors()
    data = build_design(cols, "num", preds, source=str(path), first_line=1)
    costs = CostSchedule(tuple(s.cost for s in preds), tuple(s.name for s in preds))
    return data, costs, preds


SIM_BETA = (1.0, 0.0, 0.0, 0.0, 0.5, 0.5, 0.5, 0.8, 0.8, 0.8)
SIM_COSTS = (1.0, 3.0, 9.0, 1.0, 3.0, 9.0, 1.0, 3.0, 9.0)
# Uniforms consumed per simulated row; a multiple of 4 so Philox.advance lands on row boundaries.
_DRAWS_PER_ROW = 12


@dataclass(frozen=True)
class SimulationConfig:
    """Nine N(0,1) predictors with null / smaller / larger effects and
    baseline / cheap / expensive costs. ``beta`` lists the intercept first.
    ``rho`` correlates the predictor pair ``corr_pair`` (0-based).
    """

    n: int = 150
    beta: tuple[float, ...] = SIM_BETA
    costs: tuple[float, ...] = SIM_COSTS
    rho: float = 0.0
    corr_pair: tuple[int, int] = (3, 5)
    seed: int = 0

    def __post_init__(self):
        if len(self.beta) != 10 or len(self.costs) != 9:
            raise ValueError("beta must have 10 entries (intercept first) and costs 9")
        if not abs(self.rho) < 1:
            raise ValueError(f"|rho| must be < 1, got {self.rho}")
        if self.n < 0:
            raise ValueError("n must be non-negative")
        i, j = self.corr_pair
        if i == j or not (0 <= i < 9 and 0 <= j < 9):
            raise ValueError(f"bad corr_pair {self.corr_pair}")


def _simulate_rows(config: SimulationConfig, start: int, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Rows ``start .. start+count-1`` of the seed's positional stream."""
    bitgen = np.random.Philox(key=config.seed)
    bitgen.advance(start * _DRAWS_PER_ROW // 4)
    u = np.random.Generator(bitgen).random((count, _DRAWS_PER_ROW))
    # Inverse-CDF normals keep the draw count per row fixed.
    z = ndtri(np.clip(u[:, :9], 1e-300, None))
    i, j = config.corr_pair
    rho = config.rho
    x = z.copy()
    x[:, j] = rho * z[:, i] + math.sqrt(1.0 - rho * rho) * z[:, j]
    beta = np.asarray(config.beta)
    eta = beta[0] + x @ beta[1:]
    y = (u[:, 9] < expit(eta)).astype(float)
    return x, y


def _as_design(x: np.ndarray, y: np.ndarray) -> DesignData:
    X = np.column_stack([np.ones(len(y)), x])
    groups = [np.array([k + 1]) for k in range(x.shape[1])]
    return DesignData(y, X, groups, [f"X{k + 1}" for k in range(x.shape[1])])


def simulate_dataset(config: SimulationConfig) -> tuple[DesignData, CostSchedule]:
    x, y = _simulate_rows(config, 0, config.n)
    costs = CostSchedule(config.costs, tuple(f"X{k + 1}" for k in range(9)))
    return _as_design(x, y), costs


def grow_dataset(existing: DesignData, additional_n: int, seed: int, config: SimulationConfig | None = None) -> DesignData:
    """Append ``additional_n`` rows drawn from positions ``existing.n`` onward of the seed's stream.

    Existing rows are kept as they are.
    """
    if additional_n < 0:
        raise ValueError("additional_n must be non-negative")
    config = replace(config or SimulationConfig(), seed=seed)
    x_new, y_new = _simulate_rows(config, existing.n, additional_n)
    x = np.vstack([existing.X_full[:, 1:], x_new])
    y = np.concatenate([existing.y, y_new])
    out = _as_design(x, y)
    out.names = existing.names
    return out
