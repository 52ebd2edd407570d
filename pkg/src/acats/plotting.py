"""Figures for CLI reports (rendered off-screen)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .region import RegionSweep  # noqa: E402


def plot_region(sw: RegionSweep, path, dpi: int = 120) -> None:
    """Accepted grid points with the closed-form boundary lines overlaid."""
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    U, V = np.meshgrid(sw.us, sw.vs, indexing="ij")
    ok = sw.accepted
    ax.scatter(U[ok], V[ok], s=6, c="tab:blue", label="validates")
    ax.scatter(U[~ok], V[~ok], s=6, c="0.8", label="fails")
    hi = float(max(sw.us.max(), sw.vs.max())) if sw.us.size else 1.0
    if sw.phi == 1.0:
        t = np.linspace(0, hi, 200)
        ax.plot([1, 1], [0, hi], "k--", lw=0.8)
        ax.plot(t, 1 - t, "k--", lw=0.8)
        ax.plot(t, t + 1, "k--", lw=0.8)
    ax.set_xlim(-0.05, hi + 0.05)
    ax.set_ylim(-0.05, hi + 0.05)
    ax.set_xlabel("u = d(e,e,e)")
    ax.set_ylabel("v = d(e,e,1)")
    ax.set_title(f"accepted (u, v), phi = {sw.phi:g}")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
