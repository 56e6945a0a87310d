"""Figure rendering for labelings and solve reports (Agg backend, files only)."""

from __future__ import annotations

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
from matplotlib.patches import Rectangle

from .labeling import GridLabeling

_KIND_COLORS = {
    "CompleteCell": "tab:red",
    "ProblematicFace": "tab:orange",
    "FixedVertex": "tab:green",
}


def render_labeling(gl: GridLabeling, candidates=None, path=None, ax=None):
    """Draw a 1D or 2D grid labeling: vertices colored by label, fixed hits
    starred, candidate boxes outlined."""
    d = gl.dimension
    if d > 2:
        raise ValueError("labeling plots support d <= 2 only")
    own = ax is None
    if own:
        fig, ax = plt.subplots(figsize=(6, 5 if d == 2 else 2.5))
    coords = gl.grid.vertex_grid()[: gl.labeled]
    codes = gl.label_codes()[: gl.labeled]
    fixed = gl.fixed[: gl.labeled]
    cmap = plt.get_cmap("tab10")
    if d == 1:
        x = coords[:, 0]
        signs = np.where(fixed, 0, gl.signs[: gl.labeled, 0])
        ax.scatter(x[~fixed], signs[~fixed], c=[cmap(c) for c in codes[~fixed]], s=18)
        ax.scatter(x[fixed], np.zeros(fixed.sum()), marker="*", c="k", s=90, zorder=5)
        ax.set_yticks([-1, 0, 1])
        ax.set_ylabel("label sign")
        ax.set_xlabel("x")
    else:
        pts = coords[~fixed]
        ax.scatter(pts[:, 0], pts[:, 1], c=[cmap(c) for c in codes[~fixed]], s=14)
        hits = coords[fixed]
        if len(hits):
            ax.scatter(hits[:, 0], hits[:, 1], marker="*", c="k", s=110, zorder=5)
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
        ax.set_aspect("equal")
    for c in candidates or []:
        color = _KIND_COLORS.get(c.kind, "gray")
        if d == 1:
            ax.axvspan(float(c.lo[0]), float(c.hi[0]), alpha=0.15, color=color)
        else:
            w = float(c.hi[0] - c.lo[0])
            h = float(c.hi[1] - c.lo[1])
            ax.add_patch(
                Rectangle(
                    (float(c.lo[0]), float(c.lo[1])),
                    max(w, 1e-3),
                    max(h, 1e-3),
                    fill=False,
                    edgecolor=color,
                    linewidth=1.4,
                    linestyle="--" if c.spurious else "-",
                )
            )
    ax.set_title(f"grid labeling, N={gl.grid.resolution}")
    if own:
        fig.tight_layout()
        fig.savefig(path, dpi=150)
        plt.close(fig)
    return ax


def render_depth_trace(report: dict, path=None, ax=None):
    """Best residual per depth (log scale) with candidate counts."""
    trace = report["depth_trace"]
    depths = [t["depth"] for t in trace]
    res = [max(t["best_residual"], 1e-17) for t in trace]
    own = ax is None
    if own:
        fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(depths, res, "o-", color="tab:blue", label="best residual")
    ax.set_xlabel("depth")
    ax.set_ylabel("best residual")
    ax2 = ax.twinx()
    ax2.plot(depths, [t["complete_cells"] for t in trace], "s--", color="tab:red",
             alpha=0.6, label="complete cells")
    ax2.plot(depths, [t["problematic_faces"] for t in trace], "^--", color="tab:orange",
             alpha=0.6, label="problematic faces")
    ax2.set_ylabel("candidates")
    lines, labels = ax.get_legend_handles_labels()
    lines2, labels2 = ax2.get_legend_handles_labels()
    ax.legend(lines + lines2, labels + labels2, loc="best", fontsize=8)
    ax.set_title(f"solve: {report['status']}")
    if own:
        fig.tight_layout()
        fig.savefig(path, dpi=150)
        plt.close(fig)
    return ax


def render_solve_figure(report: dict, path, gl: GridLabeling | None = None, candidates=None):
    """Depth trace, plus the depth-0 labeling when it is drawable."""
    if gl is not None and gl.dimension <= 2 and gl.is_total:
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.5))
        render_labeling(gl, candidates, ax=ax1)
        render_depth_trace(report, ax=ax2)
    else:
        fig, ax = plt.subplots(figsize=(6, 4))
        render_depth_trace(report, ax=ax)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
