"""Figures written next to the CSV/JSON outputs (Agg backend, PNG)."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_META = {"Software": None}  # keeps the bytes independent of the matplotlib build


def sweep_curve(path: Path, x: Sequence[float], series: dict, xlabel: str, title: str = "",
                zero_line: bool = False) -> Path:
    """One or more named curves over a sweep axis; NaN points are skipped."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, ys in series.items():
        pts = [(a, b) for a, b in zip(x, ys) if b is not None and math.isfinite(b)]
        if pts:
            xs, vs = zip(*pts)
            ax.plot(xs, vs, marker="o", ms=3, label=label)
    if zero_line:
        ax.axhline(0.0, color="0.5", lw=0.8)
    ax.set_xlabel(xlabel)
    ax.set_title(title)
    ax.grid(alpha=0.3)
    if len(series) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_META)
    plt.close(fig)
    return path


def check_summary(path: Path, names: Sequence[str], ratios: Sequence[float], passed: Sequence[bool]) -> Path:
    """Deviation over tolerance for each check on a log axis; failures in red."""
    fig, ax = plt.subplots(figsize=(7.0, 0.35 * len(names) + 1.5))
    vals = [max(r, 1e-16) if math.isfinite(r) else 1.0 for r in ratios]
    colors = ["tab:green" if ok else "tab:red" for ok in passed]
    ax.barh(range(len(names)), vals, color=colors)
    ax.set_yticks(range(len(names)))
    ax.set_yticklabels(names, fontsize=8)
    ax.set_xscale("log")
    ax.axvline(1.0, color="k", lw=0.8)
    ax.set_xlabel("deviation / tolerance")
    ax.invert_yaxis()
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_META)
    plt.close(fig)
    return path
