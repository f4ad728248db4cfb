"""Matplotlib figures for plans and replays, written straight to files."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .grid import Bounds, VoxelState  # noqa: E402
from .riskfield import CostField  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.dpi": 120,
    "savefig.bbox": "tight",
}


def _cost_layer(cf: CostField, bounds: Bounds, z: int) -> np.ndarray:
    sx, sy, _ = bounds.shape
    lx, ly, _ = bounds.lo
    cap = 2.0 * cf.config.unknown_cost
    out = np.empty((sy, sx))
    for j in range(sy):
        for i in range(sx):
            idx = (lx + i, ly + j, z)
            if cf.grid.get_state(idx) == VoxelState.OCCUPIED:
                out[j, i] = np.nan
            else:
                out[j, i] = min(cf.total_cost(idx), cap)
    return out


def render_plan(cf: CostField, bounds: Bounds, out, path=None, trace_poses=None, z=None, title=None):
    """Cost map of one z-layer with the planned path and/or a driven trajectory.

    Occupied voxels are drawn black, costs on a saturating color scale.
    """
    z = bounds.lo[2] if z is None else z
    layer = _cost_layer(cf, bounds, z)
    lx, ly, _ = bounds.lo
    extent = (lx - 0.5, lx + layer.shape[1] - 0.5, ly - 0.5, ly + layer.shape[0] - 0.5)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 6 * layer.shape[0] / max(layer.shape[1], 1) + 0.5))
        ax.set_facecolor("black")
        im = ax.imshow(layer, origin="lower", extent=extent, cmap="viridis", interpolation="nearest")
        fig.colorbar(im, ax=ax, shrink=0.8, label="traversal cost")
        if path is not None:
            xs = [v[0] for v in path.indices if v[2] == z]
            ys = [v[1] for v in path.indices if v[2] == z]
            ax.plot(xs, ys, color="red", lw=1.5, label="planned path")
        if trace_poses:
            xs = [p[0] for p in trace_poses]
            ys = [p[1] for p in trace_poses]
            ax.plot(xs, ys, color="white", lw=1.0, ls="--", label="traversed")
        if path is not None or trace_poses:
            ax.legend(loc="upper right")
        ax.set_xlabel("x (voxels)")
        ax.set_ylabel("y (voxels)")
        if title:
            ax.set_title(title)
        fig.savefig(out)
        plt.close(fig)
