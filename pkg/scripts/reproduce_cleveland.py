"""Cleveland heart-disease analysis: selected models along the ECP path and
their 10-fold cross-validated C-statistics.

    python3 scripts/reproduce_cleveland.py --out results/cleveland
"""

import argparse
import csv
from pathlib import Path

from costpath.data_io import load_cleveland
from costpath.inclusion_path import BGrid, compute_path, write_path_csv
from costpath.metrics import cv_cstatistic
from costpath.model_space import fit_all_models
from costpath.plots import plot_path


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/cleveland")
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--cv-seed", type=int, default=0)
    ap.add_argument("--cv-b", default="0,0.15,0.25,0.35,1", help="b values whose median models get CV")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    data, costs, _ = load_cleveland()
    fits = fit_all_models(data, args.threads)
    path = compute_path(data, costs, "ecp", BGrid.arange(0, 0.6, 0.05), fits=fits)
    write_path_csv(path, out)
    plot_path(path, out)

    cv_b = [float(b) for b in args.cv_b.split(",")]
    anchors = compute_path(data, costs, "ecp", BGrid(tuple(cv_b)), fits=fits)
    with (out / "cv_models.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["b", "predictors", "cost_per_obs", "in_sample_cstat", "cv_mean", "cv_sd"])
        for pt in anchors.points:
            rep = cv_cstatistic(data, pt.median_model, folds=10, seed=args.cv_seed)
            chosen = " ".join(data.names[j] for j in pt.median_model.indices)
            w.writerow([pt.b, chosen, f"{pt.median_cost:.2f}", f"{pt.median_cstat:.4f}",
                        f"{rep.mean:.4f}", f"{rep.std:.4f}"])
            print(f"b={pt.b:<5g} cost {pt.median_cost:7.2f}  C {pt.median_cstat:.4f}  "
                  f"CV {rep.mean:.4f} (sd {rep.std:.4f})  {{{chosen}}}")


if __name__ == "__main__":
    main()
