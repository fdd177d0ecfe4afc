"""Figures for the estimation and reduction experiments."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# Fixed metadata keeps repeated renders byte-identical.
_SAVE = {"dpi": 120, "metadata": {"Software": None}}

_STYLE = {"ESTIMATION": ("k", "o"), "AR_SS": ("tab:blue", "s"), "AR_C": ("tab:red", "^"),
          "AR_DIRECT": ("tab:green", "d")}


def _series(rows, method, attr):
    pts = sorted((r.m, getattr(r, attr)) for r in rows if r.method == method)
    return [p[0] for p in pts], [p[1] for p in pts]


def plot_fig2(rows: Sequence, path: Path) -> None:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    m, rmse = _series(rows, "ESTIMATION", "rmse_demand")
    ax1.plot(m, rmse, "k-o", ms=4)
    ax1.set_xlabel("rounds used for estimation")
    ax1.set_ylabel("RMSE (demand units)")
    ax1.set_title("(a) precision")
    m, uniq = _series(rows, "ESTIMATION", "pct_unique")
    ax2.plot(m, uniq, "k-o", ms=4)
    ax2.set_xlabel("rounds used for estimation")
    ax2.set_ylabel("unique solutions (%)")
    ax2.set_ylim(0, 100)
    ax2.set_title("(b) unique solutions")
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)


def plot_fig3(rows: Sequence, path: Path) -> None:
    methods = [m for m in _STYLE if any(r.method == m for r in rows)]
    panels = [("rmse_demand", "RMSE (demand units)", "(a) precision"),
              ("pct_unique", "unique solutions (%)", "(b) unique solutions"),
              ("mean_interactions", "interactions", "(c) interactions")]
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.5))
    for ax, (attr, label, title) in zip(axes, panels):
        for method in methods:
            color, marker = _STYLE[method]
            x, y = _series(rows, method, attr)
            ax.plot(x, y, color=color, marker=marker, ms=4, label=method)
        ax.set_xlabel("rounds used for estimation")
        ax.set_ylabel(label)
        ax.set_title(title)
    axes[1].set_ylim(0, 100)
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)
