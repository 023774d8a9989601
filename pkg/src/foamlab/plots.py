"""Figure rendering for CLI reports (headless, files only)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def save_trace_figure(report, path) -> None:
    """Best-so-far ratio per evaluation, one line per restart."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for r in report.restarts:
        if len(r.trace):
            ax.step(r.trace[:, 0], r.trace[:, 1], where="post", lw=1.0,
                    label=f"{r.index}: {r.start}")
    ax.axhline(report.best_ratio, color="k", lw=0.8, ls="--",
               label=f"best {report.best_ratio:.6f}")
    ax.set_xlabel("objective evaluations")
    ax.set_ylabel("perimeter at inradius 1")
    ax.set_title(f"ratio search, dim {report.config.dim}, seed {report.config.seed}")
    if len(report.restarts) <= 12:
        ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_comparison_figure(rows, path, title="computed vs expected") -> None:
    """Bar chart for (name, computed, expected) triples."""
    rows = [r for r in rows if r[2] is not None]
    names = [r[0] for r in rows]
    computed = np.array([r[1] for r in rows], dtype=float)
    expected = np.array([r[2] for r in rows], dtype=float)
    x = np.arange(len(rows))
    fig, ax = plt.subplots(figsize=(7, 4.0))
    ax.bar(x - 0.18, computed, width=0.36, label="computed")
    ax.bar(x + 0.18, expected, width=0.36, label="expected")
    ax.set_xticks(x)
    ax.set_xticklabels(names, rotation=20, ha="right", fontsize=8)
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
