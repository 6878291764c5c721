"""Static SVG figures: outcome/route bar charts and crossing-rate heatmaps."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# no timestamps, so identical data gives identical files
_SVG_META = {"Date": None}


def _save(fig, path) -> None:
    # fixed salt keeps the generated element ids stable
    with matplotlib.rc_context({"svg.hashsalt": "sddpg"}):
        fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)


def outcome_bars(rows, path) -> None:
    """Success rate, average distance and average speed per method, side by side."""
    methods = [r["method"] for r in rows]
    x = np.arange(len(methods))
    fig, axes = plt.subplots(1, 3, figsize=(11, 3.5))
    panels = [("success", "success rate"), ("avg_distance", "avg distance (m)"),
              ("avg_speed", "avg speed (m/s)")]
    for ax, (key, label) in zip(axes, panels):
        ax.bar(x, [r[key] for r in rows], color="tab:blue")
        ax.set_xticks(x, methods, rotation=20)
        ax.set_ylabel(label)
    axes[0].set_ylim(0, 1)
    fig.tight_layout()
    _save(fig, path)


def heatmap(report, path, world=None) -> None:
    """Per-cell success rate of the episodes that crossed the cell; blank where none did."""
    rates = report.heatmap_rates()
    x0, y0, x1, y1 = report.bounds
    fig, ax = plt.subplots(figsize=(5, 5))
    im = ax.imshow(np.ma.masked_invalid(rates), origin="lower", extent=(x0, x1, y0, y1),
                   vmin=0, vmax=1, cmap="viridis")
    if world is not None:
        for sx0, sy0, sx1, sy1 in world.segments:
            ax.plot([sx0, sx1], [sy0, sy1], color="white", lw=1)
    ax.set_title(f"{report.method} on {report.world}")
    fig.colorbar(im, ax=ax, label="crossing success rate")
    _save(fig, path)
