"""Command-line front end: ``costpath {select,path,simulate,klcurve,cv,roc}``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from . import data_io
from .inclusion_path import BGrid, compute_path, parse_grid, write_path_csv
from .laplace import fit_model, model_design, predict_proba
from .metrics import (
    c_statistic,
    cv_cstatistic,
    kl_vs_n_experiment,
    roc_curve,
    write_cv_csv,
    write_kl_csv,
    write_roc_csv,
)
from .model_space import (
    fit_all_models,
    posterior_from_fits,
    summarize,
    write_models_csv,
)
from .prior import CostSchedule, ModelIndicator, PriorSpec, load_cost_schedule

log = logging.getLogger("costpath")

BUNDLED = {"heart", "cleveland"}


class UsageError(Exception):
    pass


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("COSTPATH_THREADS")
    return int(env) if env else (os.cpu_count() or 1)


def _load(args):
    """Resolve --data / --spec / --format / --costs into (data, costs, is_cleveland)."""
    if args.data is None:
        raise UsageError("--data is required (a CSV path, or 'heart' for the bundled Cleveland file)")
    if args.data.lower() in BUNDLED:
        data, costs, _ = data_io.load_cleveland()
        cleveland = True
    elif args.format == "cleveland":
        data, costs, _ = data_io.load_cleveland(args.data)
        cleveland = True
    else:
        if args.spec is None:
            raise UsageError("--spec is required for CSV data")
        data, costs, _ = data_io.load_dataset(args.data, args.spec)
        cleveland = False
    if args.costs:
        override = load_cost_schedule(args.costs)
        by_name = dict(zip(override.names, override.costs))
        missing = [nm for nm in data.names if nm not in by_name]
        if missing:
            raise UsageError(f"{args.costs}: no cost for predictor(s) {', '.join(missing)}")
        costs = CostSchedule(tuple(by_name[nm] for nm in data.names), tuple(data.names))
    return data, costs, cleveland


def _prior(args) -> PriorSpec:
    kind = args.prior
    if kind in ("uniform", "fnd"):
        if args.b is not None:
            raise UsageError(f"--b cannot be combined with --prior {kind}")
        return PriorSpec.uniform() if kind == "uniform" else PriorSpec.fnd()
    if args.b is None:
        raise UsageError(f"--prior {kind} needs --b")
    return PriorSpec.ecp(args.b) if kind == "ecp" else PriorSpec.lcp(args.b)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _g17(x) -> str:
    return format(float(x), ".17g")


def _names(data, gamma: ModelIndicator) -> list[str]:
    return [data.names[j] for j in gamma.indices]


def cmd_select(args) -> int:
    data, costs, _ = _load(args)
    spec = _prior(args)
    out = _out_dir(args)
    fits = fit_all_models(data, _threads(args))
    table = posterior_from_fits(fits, costs, spec)
    s = summarize(table, args.threshold)
    write_models_csv(table, out / "models.csv")
    b = 0.0 if spec.family.value == "uniform" else spec.b
    with (out / "pips.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["b", "predictor", "pip"])
        for name, q in zip(data.names, s.pips):
            w.writerow([_g17(b), name, _g17(q)])
    summary = {
        "prior": spec.label(),
        "n": data.n,
        "p": data.p,
        "threshold": args.threshold,
        "excluded_models": [list(e) for e in table.excluded],
        "map_model": {"bits": s.map_model.bits, "predictors": _names(data, s.map_model),
                      "cost_per_obs": s.map_cost, "post_prob": s.map_post_prob, "cstat": s.map_cstat},
        "median_model": {"bits": s.median_model.bits, "predictors": _names(data, s.median_model),
                         "cost_per_obs": s.median_cost, "post_prob": s.median_post_prob,
                         "cstat": s.median_cstat},
    }
    (out / "selection_summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    print(f"prior {spec.label()}  n={data.n}  p={data.p}")
    for label, key in (("MAP", "map_model"), ("median", "median_model")):
        m = summary[key]
        print(f"{label:>6}: {{{', '.join(m['predictors'])}}}  cost/obs {m['cost_per_obs']:.2f}  "
              f"posterior {m['post_prob']:.4f}  C {m['cstat']:.4f}")
    return 0


def cmd_path(args) -> int:
    if args.b_grid:
        try:
            grid = parse_grid(args.b_grid)
        except ValueError as exc:
            raise UsageError(f"--b-grid: {exc}") from None
    data, costs, cleveland = _load(args)
    if not args.b_grid:
        grid = BGrid.arange(0.0, 0.6, 0.05) if cleveland else BGrid.arange(0.0, 2.0, 0.1)
    out = _out_dir(args)
    path = compute_path(data, costs, args.g, grid, args.threshold, threads=_threads(args))
    write_path_csv(path, out)
    if not args.no_plots:
        from .plots import plot_path

        plot_path(path, out)
    for pt in path.points:
        print(f"b={pt.b:<6g} median {pt.median_model.bits} cost {pt.median_cost:8.2f} C {pt.median_cstat:.4f}  "
              f"MAP {pt.map_model.bits} cost {pt.map_cost:8.2f}")
    return 0


def cmd_simulate(args) -> int:
    config = data_io.SimulationConfig(n=args.n, rho=args.rho, seed=args.seed)
    data, costs = data_io.simulate_dataset(config)
    out = _out_dir(args)
    names = list(data.names)
    with (out / "data.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["y"] + names)
        for yi, row in zip(data.y, data.X_full[:, 1:]):
            w.writerow([int(yi)] + [_g17(v) for v in row])
    spec = {"response": "y",
            "predictors": [{"name": nm, "kind": "numeric", "cost": c} for nm, c in zip(names, costs.costs)]}
    (out / "spec.json").write_text(json.dumps(spec, indent=2) + "\n", encoding="utf-8")
    with (out / "costs.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["predictor", "cost"])
        for nm, c in zip(names, costs.costs):
            w.writerow([nm, _g17(c)])
    print(f"wrote n={data.n} rows to {out / 'data.csv'}")
    return 0


def cmd_klcurve(args) -> int:
    out = _out_dir(args)
    rows = kl_vs_n_experiment(args.reps, args.n0, args.step, args.n_max, args.seed, _threads(args))
    write_kl_csv(rows, out / "kl_curve.csv")
    if not args.no_plots:
        from .plots import plot_kl

        plot_kl(rows, out / "kl_curve.svg")
    sizes = sorted({n for _, n, _ in rows})
    print(f"{args.reps} reps x {len(sizes)} sizes ({sizes[0]}..{sizes[-1]}) -> {out / 'kl_curve.csv'}")
    return 0


def _chosen_model(args, data, costs) -> ModelIndicator:
    if args.model and args.predictors:
        raise UsageError("--model and --predictors are mutually exclusive")
    if args.model:
        g = ModelIndicator.from_bits(args.model)
        if g.p != data.p:
            raise UsageError(f"--model has {g.p} bits, data has {data.p} predictors")
        return g
    if args.predictors:
        wanted = [s.strip() for s in args.predictors.split(",") if s.strip()]
        unknown = [w for w in wanted if w not in data.names]
        if unknown:
            raise UsageError(f"unknown predictor(s): {', '.join(unknown)}")
        return ModelIndicator.from_indices([data.names.index(w) for w in wanted], data.p)
    table = posterior_from_fits(fit_all_models(data, _threads(args)), costs, _prior(args))
    return summarize(table, args.threshold).median_model


def cmd_cv(args) -> int:
    data, costs, _ = _load(args)
    gamma = _chosen_model(args, data, costs)
    out = _out_dir(args)
    report = cv_cstatistic(data, gamma, args.folds, args.seed)
    write_cv_csv(report, out / "cv_report.csv")
    print(f"model {{{', '.join(_names(data, gamma))}}}: {args.folds}-fold CV C-statistic "
          f"mean {report.mean:.4f} sd {report.std:.4f}")
    return 0


def cmd_roc(args) -> int:
    data, costs, _ = _load(args)
    gamma = _chosen_model(args, data, costs)
    out = _out_dir(args)
    X, _ = model_design(data, gamma)
    scores = predict_proba(fit_model(data, gamma).beta_hat, X)
    curve = roc_curve(scores, data.y)
    write_roc_csv(curve, out / "roc.csv")
    if not args.no_plots:
        from .plots import plot_roc

        plot_roc(curve, out / "roc.svg")
    print(f"model {{{', '.join(_names(data, gamma))}}}: C-statistic {c_statistic(scores, data.y):.4f}")
    return 0


def _add_common(p: argparse.ArgumentParser, data: bool = True):
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--threads", type=int, default=None,
                   help="worker processes (default: $COSTPATH_THREADS or all cores)")
    p.add_argument("-v", "--verbose", action="store_true")
    if data:
        p.add_argument("--data", help="CSV file, raw Cleveland file (with --format cleveland), or 'heart'")
        p.add_argument("--spec", help="JSON predictor spec for CSV data")
        p.add_argument("--format", choices=("csv", "cleveland"), default="csv")
        p.add_argument("--costs", help="predictor,cost CSV overriding the spec's costs")
        p.add_argument("--threshold", type=float, default=0.5, help="median-model PIP threshold")


def _add_prior(p: argparse.ArgumentParser):
    p.add_argument("--prior", choices=("uniform", "fnd", "ecp", "lcp"), default="uniform")
    p.add_argument("--b", type=float, default=None, help="tuning parameter for --prior ecp/lcp")


def _add_model_choice(p: argparse.ArgumentParser):
    p.add_argument("--model", help="0/1 inclusion string, predictor 1 leftmost")
    p.add_argument("--predictors", help="comma-separated predictor names")
    _add_prior(p)
    p.add_argument("--no-plots", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="costpath", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", help="posterior table and selected models for one prior")
    _add_common(p)
    _add_prior(p)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("path", help="inclusion path over a grid of b")
    _add_common(p)
    p.add_argument("--g", choices=("ecp", "lcp"), default="ecp")
    p.add_argument("--b-grid", help="start:stop:step (default 0:2:0.1, or 0:0.6:0.05 for Cleveland)")
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_path)

    p = sub.add_parser("simulate", help="simulate a data set from the nine-predictor setting")
    _add_common(p, data=False)
    p.add_argument("--n", type=int, default=150)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rho", type=float, default=0.0, help="correlation between X4 and X6")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("klcurve", help="KL(FND || uniform) as simulated data sets grow")
    _add_common(p, data=False)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--n0", type=int, default=150)
    p.add_argument("--step", type=int, default=300)
    p.add_argument("--n-max", type=int, default=2550)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_klcurve)

    p = sub.add_parser("cv", help="k-fold cross-validated C-statistic of one model")
    _add_common(p)
    _add_model_choice(p)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("roc", help="in-sample ROC curve of one model")
    _add_common(p)
    _add_model_choice(p)
    p.set_defaults(func=cmd_roc)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads is not None and args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except Exception as exc:  # pipeline failure: report and exit non-zero
        if args.verbose:
            raise
        print(f"costpath {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
