"""Figure rendering for the simulator's CSV artifacts.

Wigner grids become heatmaps on a symmetric diverging color scale centered at
zero (so interference negativity reads directly), with an optional zoom inset
for the fringe region.  Frame trajectories become a two-panel figure: the
couplings against time, and the gtilde orbit in the complex plane with start
and stop markers.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .csv_io import WignerData, load_trajectory_csv, load_wigner_csv  # noqa: E402


def _draw_heatmap(ax, data: WignerData):
    vmax = float(np.abs(data.values).max()) or 1.0
    mesh = ax.pcolormesh(data.q_axis, data.p_axis, data.values,
                         cmap="RdBu_r", vmin=-vmax, vmax=vmax,
                         shading="nearest", rasterized=True)
    ax.set_aspect("equal")
    return mesh


def render_wigner(csv_path, out_image, inset_region=None) -> Path:
    """Render a Wigner CSV to an image file.

    ``inset_region`` is (q0, q1, p0, p1); when given, a zoomed copy of that
    window is drawn in the upper-left corner, mirroring the reference
    figures' central-fringe insets.
    """
    data = load_wigner_csv(csv_path)
    fig, ax = plt.subplots(figsize=(5.2, 4.6))
    mesh = _draw_heatmap(ax, data)
    ax.set_xlabel("q")
    ax.set_ylabel("p")
    fig.colorbar(mesh, ax=ax, label="W(q, p)")
    if inset_region is not None:
        q0, q1, p0, p1 = inset_region
        axins = ax.inset_axes([0.02, 0.64, 0.34, 0.34])
        _draw_heatmap(axins, data)
        axins.set_xlim(q0, q1)
        axins.set_ylim(p0, p1)
        axins.set_xticks([])
        axins.set_yticks([])
        ax.indicate_inset_zoom(axins, edgecolor="black")
    fig.tight_layout()
    out = Path(out_image)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def render_trajectory(csv_path, out_image) -> Path:
    """Render a frame-trajectory CSV to a two-panel image."""
    data = load_trajectory_csv(csv_path)
    fig, (ax_t, ax_c) = plt.subplots(1, 2, figsize=(9.0, 4.0))
    if data.g is not None:
        ax_t.plot(data.t_over_period, data.g, color="tab:gray", lw=1.2,
                  label="g / w")
    ax_t.plot(data.t_over_period, data.gtilde_abs, color="tab:red", lw=1.6,
              label="|g~| / w")
    ax_t.set_xlabel("t / T")
    ax_t.set_ylabel("coupling / w")
    ax_t.legend(frameon=False)

    ax_c.plot(data.gtilde_re, data.gtilde_im, color="tab:blue", lw=1.2)
    ax_c.plot(data.gtilde_re[0], data.gtilde_im[0], "o", color="tab:green",
              ms=7, label="start")
    ax_c.plot(data.gtilde_re[-1], data.gtilde_im[-1], "o", color="tab:red",
              ms=7, label="stop")
    ax_c.set_xlabel("Re g~ / w")
    ax_c.set_ylabel("Im g~ / w")
    ax_c.set_aspect("equal", adjustable="datalim")
    ax_c.legend(frameon=False)

    fig.tight_layout()
    out = Path(out_image)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out
