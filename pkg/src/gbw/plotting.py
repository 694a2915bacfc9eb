"""Static figure rendering for run artifacts.

Figures are a convenience view of the CSV traces, never the contract.
The Agg backend keeps rendering headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .solvers import TRACE_COLUMNS, SolveTrace  # noqa: E402

__all__ = ["convergence_figure", "heatmap_figure", "bar_figure"]

_COL = {name: i for i, name in enumerate(TRACE_COLUMNS)}


def _series(trace: SolveTrace, x_col: str, y_col: str):
    xi, yi = _COL[x_col], _COL[y_col]
    xs, ys = [], []
    for row in trace.rows:
        x, y = row[xi], row[yi]
        if x is None or y is None:
            continue
        x, y = float(x), float(y)
        if not (np.isfinite(x) and np.isfinite(y)):
            continue
        xs.append(x)
        ys.append(y)
    return xs, ys


def convergence_figure(
    traces: dict,
    path: str,
    x_col: str = "iter",
    y_col: str = "cost",
    logy: bool = True,
    title: str = "",
) -> str:
    """One line per named trace; log-scale y drops nonpositive points."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for name, trace in sorted(traces.items()):
        xs, ys = _series(trace, x_col, y_col)
        if logy:
            pairs = [(x, y) for x, y in zip(xs, ys) if y > 0.0]
            xs, ys = [p[0] for p in pairs], [p[1] for p in pairs]
        if xs:
            ax.plot(xs, ys, marker=".", label=name)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(x_col)
    ax.set_ylabel(y_col)
    if title:
        ax.set_title(title)
    if traces:
        ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def heatmap_figure(mat, path: str, title: str = "") -> str:
    mat = np.asarray(mat, dtype=float)
    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    im = ax.imshow(mat, cmap="viridis")
    fig.colorbar(im, ax=ax)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def bar_figure(labels, values, path: str, title: str = "", logy: bool = False) -> str:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    pos = np.arange(len(labels))
    ax.bar(pos, np.asarray(values, dtype=float))
    ax.set_xticks(pos)
    ax.set_xticklabels(labels, rotation=20, ha="right")
    if logy:
        ax.set_yscale("log")
    if title:
        ax.set_title(title)
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
