"""Matplotlib figures written next to the CSV reports."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .compression import ProjectedPoint  # noqa: E402
from .reports import generator_colors  # noqa: E402

STYLE = {
    "font.size": 10,
    "axes.labelsize": 11,
    "axes.titlesize": 11,
    "legend.fontsize": 8,
    "xtick.labelsize": 9,
    "ytick.labelsize": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    return path


def scatter_figure(points: Sequence[ProjectedPoint], title: str, path, extremal=None):
    """Generator-coloured projection; the closest pair is joined in green and
    the farthest in red when ``extremal`` is given."""
    colors = generator_colors([p.generator for p in points])
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6.4, 4.8))
        for gen, color in colors.items():
            xs = [p.pc1 for p in points if p.generator == gen]
            ys = [p.pc2 for p in points if p.generator == gen]
            ax.scatter(xs, ys, s=14, color=color, alpha=0.75, label=gen or "(unlabelled)",
                       edgecolors="none")
        if extremal is not None:
            where = {p.level_id: (p.pc1, p.pc2) for p in points}
            for (a, b, _), color, label in ((extremal.closest, "tab:green", "closest pair"),
                                            (extremal.farthest, "tab:red", "farthest pair")):
                (xa, ya), (xb, yb) = where[a], where[b]
                ax.plot([xa, xb], [ya, yb], color=color, lw=1.2, ls="--", label=label)
        ax.set_xlabel("PC1")
        ax.set_ylabel("PC2")
        ax.set_title(title)
        ax.legend(loc="center left", bbox_to_anchor=(1.01, 0.5), frameon=False)
        return _save(fig, path)


def summary_figure(summary, path):
    """Grouped bars of mean rho per BC and method with std error bars."""
    methods = summary.methods
    bcs = list(dict.fromkeys(r.bc for r in summary.rows))
    width = 0.8 / max(1, len(methods))
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(1.6 * len(bcs) + 2, 3.6))
        for k, method in enumerate(methods):
            rows = [summary.get(method, bc) for bc in bcs]
            xs = [i + (k - (len(methods) - 1) / 2) * width for i in range(len(bcs))]
            ax.bar(xs, [r.mean_rho for r in rows], width, yerr=[r.std_rho for r in rows],
                   capsize=3, label=method)
            for x, r in zip(xs, rows):
                if r.star:
                    ax.annotate("*", (x, r.mean_rho + r.std_rho), ha="center", va="bottom")
        ax.axhline(0, color="black", lw=0.6)
        ax.set_xticks(range(len(bcs)))
        ax.set_xticklabels(bcs)
        ax.set_ylabel("Spearman rho")
        ax.legend(frameon=False)
        return _save(fig, path)


def training_figure(reports, path):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6.0, 3.6))
        for r in reports:
            if r.training is None or not r.training.losses:
                continue
            ax.plot(range(1, len(r.training.losses) + 1), r.training.losses, lw=1,
                    label=f"{r.method} run {r.run_index}")
        ax.set_xlabel("epoch")
        ax.set_ylabel("training MAE (normalised)")
        ax.legend(frameon=False, fontsize=7, ncol=2)
        return _save(fig, path)
