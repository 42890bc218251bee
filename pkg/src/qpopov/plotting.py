"""CSV and SVG output for Popov plots and covariance trajectories."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .popov import PopovPlot

POPOV_CSV_HEADER = ("omega", "re_g1", "omega_im_g1", "lhs_a", "lhs_b")


def write_popov_csv(plot: PopovPlot, path) -> Path:
    """One row per finite frequency, then the ``inf`` row (where ``G1`` vanishes)."""
    path = Path(path)
    q = plot.gamma / 4
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(POPOV_CSV_HEADER)
        for row in zip(plot.omegas, plot.x, plot.y, plot.lhs_a, plot.lhs_b):
            w.writerow([repr(float(v)) for v in row])
        w.writerow(["inf", "0.0", "0.0", repr(q), repr(q)])
    return path


def read_popov_csv(path) -> dict[str, np.ndarray]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return {key: np.array([float(r[key]) for r in rows]) for key in POPOV_CSV_HEADER}


def write_popov_svg(plot: PopovPlot, path, title: str | None = None) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    q = plot.gamma / 4
    with matplotlib.rc_context({"svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 4.5))
        ax.plot(plot.x, plot.y, color="tab:blue", lw=1.5, label="Popov plot", gid="popov-curve")
        x_lo = min(float(np.min(plot.x)), -q) - 0.25 * q
        x_hi = max(float(np.max(plot.x)), q) + 0.25 * q
        for i, (xs, ys) in enumerate(plot.region_lines(np.linspace(x_lo, x_hi, 2))):
            ax.plot(xs, ys, color="tab:red", ls="--", lw=1.0, gid=f"region-line-{i}",
                    label="region boundary" if i == 0 else None)
        pad = 0.2 * max(float(np.ptp(plot.y)), 1e-3)
        ax.set_ylim(float(np.min(plot.y)) - pad, float(np.max(plot.y)) + pad)
        ax.set_xlim(x_lo, x_hi)
        ax.axhline(0, color="0.7", lw=0.5)
        ax.axvline(0, color="0.7", lw=0.5)
        ax.set_xlabel("Re[G1(iω)]")
        ax.set_ylabel("ω·Im[G1(iω)]")
        slope = "vertical strip" if plot.theta == 0 else f"slope 1/θ = {1 / plot.theta:.3g}"
        status = "inside" if plot.inside else "outside"
        ax.set_title(title or f"Popov plot: θ = {plot.theta:g}, γ = {plot.gamma:g} ({slope}; {status})")
        ax.legend(loc="best", fontsize="small")
        fig.tight_layout()
        fig.savefig(path, format="svg")
        plt.close(fig)
    return path


def write_trajectory_csv(times, traces, path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(("t", "trace"))
        for t, v in zip(times, traces):
            w.writerow([repr(float(t)), repr(float(v)) if math.isfinite(v) else "inf"])
    return path
