"""Shared style: palette, rcParams, and deterministic image saving.

matplotlib must run headless here, so the Agg backend is forced before
pyplot is first imported.  Captions follow the house convention: observed
values are blue stars, planning trajectories are dotted.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .errors import FigureInputError

OBSERVED = "#1f77b4"

# Fixed colors for the labels a default run produces; anything else draws
# from FALLBACK in first-seen order so custom runs still render stably.
PALETTE = {
    "model1": "#d95f02",
    "model2": "#7570b3",
    "truth": "#1b9e77",
    "model_A": "#d95f02",
    "model_B": "#7570b3",
    "truth_under_model_A": "#d95f02",
    "truth_under_model_B": "#7570b3",
    "truth_optimal": "#1b9e77",
    "observed_history": OBSERVED,
}

FALLBACK = ("#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666")

RC = {
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "figure.constrained_layout.use": True,
    "font.size": 9,
    "axes.titlesize": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "lines.linewidth": 1.4,
    # stable element ids so repeated SVG renders are byte-identical
    "svg.hashsalt": "ftfig",
}

FORMATS = ("png", "svg")


class Colors:
    """Per-figure color lookup: palette hits first, then a stable cycle."""

    def __init__(self):
        self._extra: dict = {}

    def __call__(self, label: str) -> str:
        if label in PALETTE:
            return PALETTE[label]
        if label not in self._extra:
            self._extra[label] = FALLBACK[len(self._extra) % len(FALLBACK)]
        return self._extra[label]


def new_figure(figsize):
    plt.rcParams.update(RC)
    return plt.figure(figsize=figsize)


def image_format(path: Path) -> str:
    fmt = Path(path).suffix.lstrip(".").lower()
    if fmt not in FORMATS:
        raise FigureInputError(
            f"unsupported output format {fmt!r}; expected one of {FORMATS}"
        )
    return fmt


def save(fig, path: Path) -> None:
    """Write png or svg with pinned metadata so reruns are byte-identical."""
    path = Path(path)
    fmt = image_format(path)
    if fmt == "svg":
        fig.savefig(path, format="svg", metadata={"Date": None})
    else:
        fig.savefig(path, format="png", metadata={"Software": "ftfig"})
