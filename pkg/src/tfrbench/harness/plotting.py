"""Figure rendering for benchmark reports (Agg backend, files only)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..sampling import STRATEGIES  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
    "svg.hashsalt": "tfrbench",
}


def golden_size(width=6.0):
    return width, width * (np.sqrt(5.0) - 1.0) / 2.0


def plot_metric_bars(rows, metric, path):
    methods = list(dict.fromkeys(r["method"] for r in rows))
    sets = [s for s in STRATEGIES if any(r["test_set"] == s for r in rows)]
    lookup = {(r["method"], r["test_set"]): r[metric] for r in rows}
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=golden_size())
        width = 0.8 / max(len(methods), 1)
        x = np.arange(len(sets))
        for i, m in enumerate(methods):
            vals = [lookup.get((m, s), np.nan) for s in sets]
            ax.bar(x + (i - (len(methods) - 1) / 2) * width, vals, width, label=m)
        ax.set_xticks(x, sets)
        ax.set_ylabel(f"{metric.upper()} (K)")
        case = rows[0]["case"] if rows else ""
        ax.set_title(f"{case}: {metric.upper()} by test set")
        ax.legend(ncol=3, frameon=False)
        fig.savefig(path)
        plt.close(fig)


def plot_error_maps(npz_path, path, max_panels=12):
    data = np.load(npz_path)
    keys = sorted(data.files)[:max_panels]
    if not keys:
        return
    ncol = min(4, len(keys))
    nrow = int(np.ceil(len(keys) / ncol))
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(nrow, ncol, figsize=(2.4 * ncol, 2.2 * nrow), squeeze=False)
        for ax, key in zip(axes.flat, keys):
            im = ax.imshow(data[key], origin="lower", cmap="magma")
            ax.set_title(key.replace("__", " / "), fontsize=7)
            ax.set_xticks([])
            ax.set_yticks([])
            fig.colorbar(im, ax=ax, fraction=0.046, pad=0.04)
        for ax in list(axes.flat)[len(keys):]:
            ax.axis("off")
        fig.savefig(path)
        plt.close(fig)
