"""Figure rendering for the report outputs.

Each function saves a PNG next to the delimited output it illustrates.
The Agg backend is forced so figures render in headless runs.
"""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evaluation import PRCurve


def save_pr_curve(curve: PRCurve, path, title: str | None = None) -> None:
    fig, ax = plt.subplots(figsize=(5, 4))
    recalls = [p.recall for p in curve.points]
    precisions = [p.precision for p in curve.points]
    order = np.argsort(recalls)
    ax.plot(np.array(recalls)[order], np.array(precisions)[order], "-o", ms=3)
    best = max(curve.points, key=lambda p: p.f1)
    ax.scatter([best.recall], [best.precision], color="crimson", zorder=3)
    ax.annotate(
        f"max F1 = {curve.max_f1:.3f}",
        (best.recall, best.precision),
        textcoords="offset points",
        xytext=(6, -12),
        fontsize=9,
    )
    ax.set_xlabel("recall")
    ax.set_ylabel("precision")
    ax.set_xlim(-0.02, 1.02)
    ax.set_ylim(-0.02, 1.02)
    ax.grid(alpha=0.3)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_sweep(rows: Sequence[tuple[float, int, float]], path) -> None:
    """rows: (sequence length in meters, length in frames, max F1)."""
    fig, ax = plt.subplots(figsize=(5, 4))
    meters = [r[0] for r in rows]
    scores = [r[2] for r in rows]
    ax.plot(meters, scores, "-o")
    ax.set_xlabel("sequence length [m]")
    ax.set_ylabel("max F1")
    ax.set_ylim(-0.02, 1.02)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_projection(coords: np.ndarray, path, title: str | None = None) -> None:
    """2-D projection scatter, colored by frame index to expose temporal
    structure."""
    fig, ax = plt.subplots(figsize=(5, 4.4))
    n = coords.shape[0]
    sc = ax.scatter(coords[:, 0], coords[:, 1], c=np.arange(n), cmap="viridis", s=12)
    fig.colorbar(sc, ax=ax, label="frame index")
    ax.set_xlabel("pc1")
    ax.set_ylabel("pc2")
    ax.grid(alpha=0.3)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
