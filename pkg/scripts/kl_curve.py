"""KL divergence between cost-penalized (FND) and benefit-only posteriors as
simulated data sets grow.

    python3 scripts/kl_curve.py --out results/kl
"""

import argparse
from pathlib import Path

from costpath.metrics import kl_vs_n_experiment, write_kl_csv
from costpath.plots import plot_kl


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/kl")
    ap.add_argument("--reps", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    rows = kl_vs_n_experiment(reps=args.reps, seed=args.seed, threads=args.threads)
    write_kl_csv(rows, out / "kl_curve.csv")
    plot_kl(rows, out / "kl_curve.svg")
    first = {r: kl for r, n, kl in rows if n == 150}
    last = {r: kl for r, n, kl in rows if n == 2550}
    for r in sorted(first):
        trail = " ".join(f"{kl:7.3f}" for rr, _, kl in rows if rr == r)
        print(f"rep {r}: {trail}   ratio {last[r] / first[r]:.3g}")
    hits = sum(last[r] < 0.1 * first[r] for r in first)
    print(f"{hits}/{len(first)} reps end below a tenth of their starting KL")


if __name__ == "__main__":
    main()
