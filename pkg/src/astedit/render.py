"""Render tree geometry to an image file.

Coordinates follow the layout convention: origin top-left, y growing
downward.  Segments are drawn first, then node rectangles, then labels,
matching the painter order of the geometry itself.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

from .layoutbox import Geometry, Rect, Seg, Text

_FILLS = {"gray": "#c8c8c8", "none": "white"}


def render_png(geometry: Geometry, path, dpi=100, margin=8.0):
    width, height = geometry.bounds
    fig, ax = plt.subplots(
        figsize=(max(width + 2 * margin, 32) / dpi,
                 max(height + 2 * margin, 32) / dpi),
        dpi=dpi,
    )
    try:
        ax.set_xlim(-margin, width + margin)
        ax.set_ylim(height + margin, -margin)
        ax.set_aspect("equal")
        ax.axis("off")
        for prim in geometry.primitives:
            if isinstance(prim.shape, Seg):
                s = prim.shape
                ax.plot([s.x1, s.x2], [s.y1, s.y2],
                        color="black", linewidth=1, zorder=1)
        for prim in geometry.primitives:
            if isinstance(prim.shape, Rect):
                s = prim.shape
                ax.add_patch(Rectangle(
                    (s.x, s.y), s.w, s.h,
                    facecolor=_FILLS.get(s.fill, s.fill),
                    edgecolor="black", linewidth=1, zorder=2,
                ))
        for prim in geometry.primitives:
            if isinstance(prim.shape, Text):
                s = prim.shape
                ax.text(s.x, s.y, s.text, ha="left", va="top",
                        family="monospace", fontsize=8, zorder=3)
        fig.savefig(path, dpi=dpi, bbox_inches="tight")
    finally:
        plt.close(fig)
