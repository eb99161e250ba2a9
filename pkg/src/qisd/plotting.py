"""PNG rendering of trade-off curves, written next to the CSV output."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

from .estimator import TradeoffCurve

_STYLE = {
    "hybrid_prange": ("Hybrid-Prange", "-"),
    "punctured": ("Punctured", "--"),
    "combined": ("Combined", "-."),
}


def plot_curves(curves: Sequence[TradeoffCurve], path: str | Path, title: str | None = None) -> Path:
    """Plot ``t`` against ``delta`` for each curve and save as PNG."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    for c in curves:
        label, ls = _STYLE.get(c.algorithm, (c.algorithm, "-"))
        ax.plot(c.deltas, c.ts, ls, label=f"{label} ({c.setting})" if len(
            {cc.setting for cc in curves}) > 1 else label)
    ax.axhline(0.5, color="0.7", lw=0.8)
    ax.set_xlim(0.0, 1.0)
    ax.set_ylim(0.45, 1.02)
    ax.set_xlabel(r"qubit reduction factor $\delta$")
    ax.set_ylabel(r"runtime exponent ratio $t$")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    path = Path(path)
    # fixed metadata keeps reruns byte-identical
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path
