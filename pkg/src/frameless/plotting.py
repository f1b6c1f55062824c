"""Matplotlib figures for comparison reports."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_STYLE = {"framed": "-", "frameless": "--", "adaptive": "-"}
_WIDTH = {"framed": 1.0, "frameless": 1.0, "adaptive": 2.0}


def plot_rms_trace(result, path: str | Path) -> Path:
    """RMS error per refresh for every mode in ``result``; returns the written path."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6.4, 3.6), dpi=100)
    for mode in result.report.mean_rms:
        t, e = result.series(mode)
        ax.plot(t, e, _STYLE.get(mode, "-"), lw=_WIDTH.get(mode, 1.0), label=mode)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("RMS error")
    cfg = result.report.config
    ax.set_title(f"{cfg.get('scene', '')} at {cfg.get('budget', 0):,.0f} samples/s", fontsize=10)
    ax.set_ylim(bottom=0)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    # no Software/date metadata so repeated runs are byte-identical
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path
