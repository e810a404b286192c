"""Pure CSV-to-image rendering for run directories."""

from __future__ import annotations

import csv
import glob
import os
from dataclasses import dataclass
from typing import Optional, Sequence

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
from matplotlib import colormaps, colors, image  # noqa: E402

KINDS = ("heatmap", "mae_curve", "objective_pair", "spectrum")

METRIC_COLUMNS = ("iteration", "objective", "data_term", "penalty_term",
                  "eta", "mae")

HEATMAP_CMAP = "viridis"


class SchemaError(ValueError):
    """A run directory is missing a file or column the figure needs."""


@dataclass
class FigureSpec:
    kind: str
    runs: Sequence[str]
    out_path: str
    array: Optional[str] = None  # array name for heatmap/spectrum kinds

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not self.runs:
            raise ValueError("at least one run directory is required")


def read_labeled_array(path):
    """Labeled CSV -> (values, row_label, col_label, row_coords, col_coords)."""
    if not os.path.exists(path):
        raise SchemaError(f"missing array file {path}")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or "\\" not in rows[0][0]:
        raise SchemaError(f"{path} lacks the 'row\\col' labeled header")
    row_label, col_label = rows[0][0].split("\\", 1)
    col_coords = np.array([float(v) for v in rows[0][1:]])
    row_coords = np.array([float(r[0]) for r in rows[1:]])
    values = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    return values, row_label, col_label, row_coords, col_coords


def read_metrics(run_dir, columns):
    """Numeric columns of metrics.csv; blank cells are dropped per column."""
    path = os.path.join(run_dir, "metrics.csv")
    if not os.path.exists(path):
        raise SchemaError(f"missing metrics file {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in columns:
            if col not in header:
                raise SchemaError(f"{path} is missing column {col!r}")
        rows = list(reader)
    out = {}
    for col in columns:
        pairs = [(float(r["iteration"]), float(r[col]))
                 for r in rows if r[col] != ""]
        out[col] = (np.array([p[0] for p in pairs]),
                    np.array([p[1] for p in pairs]))
    return out


def heatmap_rgba(values, vmin=None, vmax=None):
    """The exact uint8 RGBA pixels the heatmap image will contain."""
    values = np.asarray(values, float)
    vmin = float(np.min(values)) if vmin is None else vmin
    vmax = float(np.max(values)) if vmax is None else vmax
    norm = colors.Normalize(vmin=vmin, vmax=vmax)
    mapped = colormaps[HEATMAP_CMAP](norm(values), bytes=True)
    return mapped


def _render_heatmap(spec):
    name = spec.array or "heatmap_model"
    path = os.path.join(spec.runs[0], "arrays", f"{name}.csv")
    values, *_ = read_labeled_array(path)
    # one pixel per cell: no axes, no interpolation, no resampling
    image.imsave(spec.out_path, values, cmap=HEATMAP_CMAP,
                 vmin=float(np.min(values)), vmax=float(np.max(values)))


def _render_mae_curve(spec):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for run in spec.runs:
        its, maes = read_metrics(run, ("mae",))["mae"]
        if its.size == 0:
            raise SchemaError(f"{run}/metrics.csv has no mae values")
        ax.semilogy(its, maes, marker="o", markersize=3,
                    label=os.path.basename(os.path.normpath(run)))
    ax.set_xlabel("iteration")
    ax.set_ylabel("mean absolute error")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(spec.out_path, dpi=150)
    plt.close(fig)


def _render_objective_pair(spec):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for run in spec.runs:
        its, objs = read_metrics(run, ("objective",))["objective"]
        ax.semilogy(its, np.maximum(objs, 1e-300),
                    label=os.path.basename(os.path.normpath(run)))
    ax.set_xlabel("iteration")
    ax.set_ylabel("objective (log scale)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(spec.out_path, dpi=150)
    plt.close(fig)


def _render_spectrum(spec):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    plotted = False
    for run in spec.runs:
        if spec.array:
            paths = [os.path.join(run, "arrays", f"{spec.array}.csv")]
        else:
            paths = sorted(glob.glob(os.path.join(run, "arrays",
                                                  "spectrum_*.csv")))
        if not paths:
            raise SchemaError(f"{run} has no spectrum arrays")
        for path in paths:
            values, *_ = read_labeled_array(path)
            label = os.path.splitext(os.path.basename(path))[0]
            for row in np.atleast_2d(values):
                ax.plot(np.arange(row.size), row, marker="o", markersize=3,
                        label=label)
                plotted = True
    if not plotted:
        raise SchemaError("no spectrum data found")
    ax.set_xlabel("index")
    ax.set_ylabel("singular value")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(spec.out_path, dpi=150)
    plt.close(fig)


_RENDERERS = {
    "heatmap": _render_heatmap,
    "mae_curve": _render_mae_curve,
    "objective_pair": _render_objective_pair,
    "spectrum": _render_spectrum,
}


def render(spec: FigureSpec):
    """Render one figure; returns the output path."""
    _RENDERERS[spec.kind](spec)
    return spec.out_path
