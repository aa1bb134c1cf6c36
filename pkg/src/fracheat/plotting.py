"""Deterministic SVG line plots of CSV-style columns."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "svg.hashsalt": "fracheat",       # stable element ids
    "svg.fonttype": "path",
    "figure.figsize": (6.0, 4.0),
    "axes.grid": True,
    "grid.alpha": 0.4,
    "font.size": 9,
}


def line_plot(path, x, series: dict, xlabel="", ylabel="", title="", logx=False, logy=False,
              markers=False):
    """Write one line per entry of ``series`` against ``x`` to an SVG file.

    Non-finite and (on log axes) non-positive values are dropped from each line.
    """
    x = np.asarray(x, float)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for name, y in series.items():
            y = np.asarray(y, float)
            ok = np.isfinite(x) & np.isfinite(y)
            if logx:
                ok &= x > 0
            if logy:
                ok &= y > 0
            ax.plot(x[ok], y[ok], marker="o" if markers else None, ms=3, lw=1.2, label=name)
        if logx:
            ax.set_xscale("log")
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        if len(series) > 1:
            ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path
