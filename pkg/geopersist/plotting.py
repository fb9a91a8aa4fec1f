#!/usr/bin/env python3
"""
Static SVG output for persistence diagrams.

Output is byte-identical across runs: Agg backend, fixed svg.hashsalt and no
Date metadata.
"""

import logging
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

from homology import DecoratedDiagram  # noqa: E402

logger = logging.getLogger(__name__)

SVG_SALT = "geopersist"
KNOWN_COLOR = "#1f77b4"
SAMPLE_COLOR = "#d62728"
BAND_COLOR = "#2ca02c"

matplotlib.rcParams["svg.hashsalt"] = SVG_SALT
matplotlib.rcParams["svg.fonttype"] = "none"


def _extent(*diagrams: Optional[DecoratedDiagram], pad: float = 0.0) -> float:
    top = 0.0
    for diagram in diagrams:
        if diagram is not None:
            top = max([top, diagram.rmax] + [bar.death for bar in diagram.intervals])
    return (top or 1.0) * 1.08 + pad


def _scatter(ax, diagram: Optional[DecoratedDiagram], color: str, marker: str, label: str):
    if diagram is None or not diagram.intervals:
        return
    finite = diagram.finite()
    censored = diagram.censored()
    if finite:
        ax.scatter([b.birth for b in finite], [b.death for b in finite], c=color, marker=marker, s=22, label=label, zorder=3)
    if censored:
        ax.scatter([b.birth for b in censored], [b.death for b in censored], facecolors="none",
                   edgecolors=color, marker=marker, s=30, label=f"{label} (censored)", zorder=3)


def _frame(ax, top: float, title: str):
    ax.plot([0, top], [0, top], color="black", linewidth=0.8)
    ax.set_xlim(0, top)
    ax.set_ylim(0, top)
    ax.set_aspect("equal")
    ax.set_xlabel("birth")
    ax.set_ylabel("death")
    ax.set_title(title, fontsize=9)


def _intrinsic_bands(ax, known: DecoratedDiagram, s: float, top: float):
    """Births up to 2s, deaths in [d, d + 2s], spurious bars within s of the diagonal."""
    for bar in known.intervals:
        ax.add_patch(Rectangle((0, bar.death), 2 * s, 2 * s, color=BAND_COLOR, alpha=0.25, linewidth=0))
    ax.fill_between([0, top], [0, top], [s, top + s], color="grey", alpha=0.15, linewidth=0)


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.debug("wrote %s", path)
    return path


def diagram_svg(diagram: DecoratedDiagram, path, s: Optional[float] = None,
                known: Optional[DecoratedDiagram] = None, title: str = "H1") -> Path:
    """One diagram, optionally over the known diagram and its stability bands."""
    top = _extent(diagram, known, pad=2 * (s or 0.0))
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    _frame(ax, top, title)
    if known is not None and s is not None:
        _intrinsic_bands(ax, known, s, top)
    _scatter(ax, known, KNOWN_COLOR, "o", "space")
    _scatter(ax, diagram, SAMPLE_COLOR, "x", "sample")
    if ax.get_legend_handles_labels()[0]:
        ax.legend(fontsize=7, loc="lower right")
    return _save(fig, path)


def stability_svg(known: DecoratedDiagram, sample: DecoratedDiagram, enriched: DecoratedDiagram,
                  s: float, path) -> Path:
    """
    Three panels: the classical band (L∞ squares of radius 2s around each
    known point), the intrinsic band, and the exact deaths of an enriched sample.
    """
    top = _extent(known, sample, enriched, pad=2 * s)
    fig, axes = plt.subplots(1, 3, figsize=(12, 4.2))

    ax = axes[0]
    _frame(ax, top, "classical bound")
    for bar in known.intervals:
        ax.add_patch(Rectangle((bar.birth - 2 * s, bar.death - 2 * s), 4 * s, 4 * s,
                               color=KNOWN_COLOR, alpha=0.2, linewidth=0))
    ax.fill_between([0, top], [0, top], [2 * s, top + 2 * s], color="grey", alpha=0.15, linewidth=0)
    _scatter(ax, known, KNOWN_COLOR, "o", "space")
    _scatter(ax, sample, SAMPLE_COLOR, "x", "sample")

    ax = axes[1]
    _frame(ax, top, "intrinsic bound")
    _intrinsic_bands(ax, known, s, top)
    _scatter(ax, known, KNOWN_COLOR, "o", "space")
    _scatter(ax, sample, SAMPLE_COLOR, "x", "sample")

    ax = axes[2]
    _frame(ax, top, "enriched sample")
    _scatter(ax, known, KNOWN_COLOR, "o", "space")
    _scatter(ax, enriched, SAMPLE_COLOR, "x", "enriched")

    for ax in axes:
        if ax.get_legend_handles_labels()[0]:
            ax.legend(fontsize=7, loc="lower right")
    fig.tight_layout()
    return _save(fig, path)
