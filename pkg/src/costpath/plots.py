"""SVG line charts for inclusion paths. Darker red = costlier predictor."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .inclusion_path import PathResult  # noqa: E402

_STYLES = ("-", "--", ":", "-.")


def _cost_colors(costs) -> list:
    tiers = sorted(set(costs))
    cmap = plt.get_cmap("Reds")
    shade = {c: cmap(0.35 + 0.6 * (i / max(1, len(tiers) - 1))) for i, c in enumerate(tiers)}
    return [shade[c] for c in costs]


def plot_path(path: PathResult, out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    b = path.b_values
    pips = path.pip_matrix()
    costs = path.costs or (1.0,) * len(path.names)
    colors = _cost_colors(costs)
    seen: dict[float, int] = {}
    written = []

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for j, name in enumerate(path.names):
        k = seen.get(costs[j], 0)
        seen[costs[j]] = k + 1
        ax.plot(b, pips[:, j], color=colors[j], linestyle=_STYLES[k % len(_STYLES)],
                label=f"{name} ({costs[j]:g})")
    ax.axhline(path.threshold, color="grey", linewidth=0.8)
    ax.set_xlabel("b")
    ax.set_ylabel("posterior inclusion probability")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(fontsize=7, loc="center left", bbox_to_anchor=(1.0, 0.5))
    fig.tight_layout()
    written.append(out_dir / "path.svg")
    fig.savefig(written[-1])
    plt.close(fig)

    for fname, ylabel, attr in (("cost.svg", "cost per observation", "cost"),
                                ("cstat.svg", "C-statistic", "cstat")):
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.step(b, [getattr(pt, f"map_{attr}") for pt in path.points], where="post", label="MAP model")
        ax.step(b, [getattr(pt, f"median_{attr}") for pt in path.points], where="post",
                linestyle="--", label="median probability model")
        ax.set_xlabel("b")
        ax.set_ylabel(ylabel)
        ax.legend(fontsize=8)
        fig.tight_layout()
        written.append(out_dir / fname)
        fig.savefig(written[-1])
        plt.close(fig)
    return written


def plot_kl(rows, out_path) -> Path:
    out_path = Path(out_path)
    fig, ax = plt.subplots(figsize=(6, 4))
    reps = sorted({r for r, _, _ in rows})
    for rep in reps:
        pts = np.array([(n, kl) for r, n, kl in rows if r == rep])
        ax.plot(pts[:, 0], pts[:, 1], marker="o", markersize=3)
    ax.set_xlabel("n")
    ax.set_ylabel("KL(FND || benefit-only)")
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return out_path


def plot_roc(curve, out_path) -> Path:
    out_path = Path(out_path)
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    ax.plot(curve.fpr, curve.tpr)
    ax.plot([0, 1], [0, 1], color="grey", linewidth=0.8)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return out_path
