"""Static figures: coefficient heatmaps and relative-error curves.

Figures are written as SVG with a fixed hash salt and no timestamp so
identical inputs give identical files.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "svg.hashsalt": "sparse-ou",
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "figure.dpi": 100,
}

METHOD_COLORS = {"mle": "#d62728", "lasso": "#1f77b4", "dantzig": "#2ca02c"}
METHOD_LABELS = {"mle": "MLE", "lasso": "Lasso", "dantzig": "Dantzig"}


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def heatmap(matrix, path, vmax, title=""):
    """Diverging heatmap on the symmetric scale [-vmax, vmax]; exact zeros stay white."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(3.4, 3.0))
        im = ax.imshow(np.asarray(matrix), cmap="RdBu_r", vmin=-vmax, vmax=vmax,
                       interpolation="nearest")
        ax.set_title(title)
        ax.set_xticks([])
        ax.set_yticks([])
        fig.colorbar(im, ax=ax, fraction=0.046, pad=0.04)
        fig.tight_layout()
        _save(fig, path)


def error_curves(summary_rows, norm, path):
    """Mean relative error against d per method, shaded +- one standard deviation."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.0, 3.0))
        for method in ("mle", "lasso", "dantzig"):
            rows = sorted(
                (r for r in summary_rows if r["method"] == method and r["norm"] == norm
                 and r["n_ok"] > 0),
                key=lambda r: r["d"],
            )
            if not rows:
                continue
            d = np.array([r["d"] for r in rows])
            mean = np.array([r["mean"] for r in rows])
            std = np.array([r["std"] for r in rows])
            color = METHOD_COLORS[method]
            ax.plot(d, mean, marker="o", ms=3, color=color, label=METHOD_LABELS[method])
            ax.fill_between(d, mean - std, mean + std, color=color, alpha=0.2, lw=0)
        ax.set_xlabel("dimension d")
        ax.set_ylabel(f"relative error ({'L1' if norm == 'l1' else 'Frobenius'})")
        ax.legend(frameon=False)
        fig.tight_layout()
        _save(fig, path)
