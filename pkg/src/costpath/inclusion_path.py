"""Inclusion paths: posterior inclusion probabilities and selected-model
cost / C-statistic as the cost-penalty tuning parameter ``b`` varies."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .laplace import DesignData
from .model_space import ModelFits, fit_all_models, posterior_from_fits, summarize
from .prior import CostSchedule, GKind, ModelIndicator, PriorSpec

__all__ = [
    "BGrid",
    "PathPoint",
    "PathResult",
    "parse_grid",
    "compute_path",
    "path_to_tables",
    "write_path_csv",
    "read_path_csv",
]


@dataclass(frozen=True)
class BGrid:
    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ValueError("grid is empty")
        if vals[0] < 0:
            raise ValueError("grid values must be non-negative")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("grid must be strictly increasing")
        object.__setattr__(self, "values", vals)

    @classmethod
    def arange(cls, start: float, stop: float, step: float) -> "BGrid":
        """Inclusive ``start:stop:step`` grid, rounded to absorb float drift."""
        if step <= 0:
            raise ValueError("grid step must be positive")
        if stop < start:
            raise ValueError("grid stop must be >= start")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return cls(tuple(round(start + i * step, 12) for i in range(count)))

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)


def parse_grid(text: str) -> BGrid:
    """Parse ``start:stop:step``."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must look like start:stop:step, got {text!r}")
    start, stop, step = (float(x) for x in parts)
    return BGrid.arange(start, stop, step)


@dataclass(frozen=True)
class PathPoint:
    b: float
    pips: tuple[float, ...]
    map_model: ModelIndicator
    median_model: ModelIndicator
    map_cost: float
    median_cost: float
    map_cstat: float
    median_cstat: float


@dataclass(frozen=True)
class PathResult:
    g_kind: GKind
    threshold: float
    names: tuple[str, ...]
    costs: tuple[float, ...]
    points: tuple[PathPoint, ...]

    @property
    def b_values(self) -> np.ndarray:
        return np.array([pt.b for pt in self.points])

    def pip_matrix(self) -> np.ndarray:
        """(len(grid), p) array of inclusion probabilities."""
        return np.array([pt.pips for pt in self.points])


def compute_path(
    data: DesignData,
    costs: CostSchedule,
    g_kind: GKind | str = GKind.ECP,
    grid: BGrid | Sequence[float] = BGrid.arange(0.0, 2.0, 0.1),
    threshold: float = 0.5,
    fits: ModelFits | None = None,
    threads: int | None = None,
) -> PathResult:
    """Sweep ``b`` over ``grid`` and record PIPs plus MAP / median summaries.

    The Laplace fits are computed once; every grid point applies its own
    prior to the same fits, so any sub-grid reproduces the full grid's values.
    """
    g_kind = GKind(g_kind)
    if not isinstance(grid, BGrid):
        grid = BGrid(tuple(grid))
    if fits is None:
        fits = fit_all_models(data, threads)
    points = []
    for b in grid:
        try:
            table = posterior_from_fits(fits, costs, PriorSpec(family="fnd_family", g_kind=g_kind, b=b))
            s = summarize(table, threshold)
        except Exception as exc:
            raise RuntimeError(f"inclusion path failed at b={b:g}: {exc}") from exc
        points.append(PathPoint(b, s.pips, s.map_model, s.median_model, s.map_cost, s.median_cost,
                                s.map_cstat, s.median_cstat))
    names = tuple(data.names) if data.names else tuple(f"X{j + 1}" for j in range(data.p))
    return PathResult(g_kind, threshold, names, costs.costs, tuple(points))


PIPS_FIELDS = ("b", "predictor", "pip")
SUMMARY_FIELDS = ("b", "map_bits", "map_cost", "map_cstat", "median_bits", "median_cost", "median_cstat")


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def path_to_tables(path: PathResult) -> tuple[list[tuple], list[tuple]]:
    """Long-format PIP rows and one summary row per grid value."""
    pips = [(pt.b, name, q) for pt in path.points for name, q in zip(path.names, pt.pips)]
    summary = [
        (pt.b, pt.map_model.bits, pt.map_cost, pt.map_cstat, pt.median_model.bits, pt.median_cost, pt.median_cstat)
        for pt in path.points
    ]
    return pips, summary


def write_path_csv(path: PathResult, out_dir) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    pips, summary = path_to_tables(path)
    pips_path = out_dir / "pips.csv"
    with pips_path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(PIPS_FIELDS)
        for b, name, q in pips:
            w.writerow([_g17(b), name, _g17(q)])
    summary_path = out_dir / "path_summary.csv"
    with summary_path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_FIELDS)
        for b, mb, mc, ms, db, dc, ds in summary:
            w.writerow([_g17(b), mb, _g17(mc), _g17(ms), db, _g17(dc), _g17(ds)])
    return pips_path, summary_path


def read_path_csv(out_dir, g_kind: GKind | str = GKind.ECP, threshold: float = 0.5,
                  costs: Sequence[float] = ()) -> PathResult:
    """Rebuild a :class:`PathResult` from ``pips.csv`` and ``path_summary.csv``."""
    out_dir = Path(out_dir)
    with (out_dir / "pips.csv").open(newline="", encoding="utf-8") as fh:
        pip_rows = list(csv.DictReader(fh))
    with (out_dir / "path_summary.csv").open(newline="", encoding="utf-8") as fh:
        sum_rows = list(csv.DictReader(fh))
    names: list[str] = []
    for r in pip_rows:
        if r["predictor"] not in names:
            names.append(r["predictor"])
    by_b: dict[float, dict[str, float]] = {}
    for r in pip_rows:
        by_b.setdefault(float(r["b"]), {})[r["predictor"]] = float(r["pip"])
    points = []
    for r in sum_rows:
        b = float(r["b"])
        points.append(PathPoint(
            b, tuple(by_b[b][nm] for nm in names),
            ModelIndicator.from_bits(r["map_bits"]), ModelIndicator.from_bits(r["median_bits"]),
            float(r["map_cost"]), float(r["median_cost"]), float(r["map_cstat"]), float(r["median_cstat"]),
        ))
    return PathResult(GKind(g_kind), threshold, tuple(names), tuple(costs), tuple(points))
