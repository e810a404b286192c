"""Run-directory output: config echo, metrics CSV, summary JSON, and
labeled CSV arrays for the plotting layer."""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..training import MetricsLog

__all__ = ["LabeledArray", "ExperimentReport"]


@dataclass
class LabeledArray:
    """2-D array plus axis labels, serialized as a labeled CSV."""

    values: np.ndarray
    row_label: str
    col_label: str
    row_coords: Optional[np.ndarray] = None
    col_coords: Optional[np.ndarray] = None

    def to_csv(self, path):
        vals = np.atleast_2d(np.asarray(self.values, float))
        rows, cols = vals.shape
        ccoords = self.col_coords if self.col_coords is not None else np.arange(cols)
        rcoords = self.row_coords if self.row_coords is not None else np.arange(rows)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"{self.row_label}\\{self.col_label}"]
                       + [repr(float(c)) for c in ccoords])
            for r, row in zip(rcoords, vals):
                w.writerow([repr(float(r))] + [repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        head = rows[0][0].split("\\")
        col_coords = np.array([float(v) for v in rows[0][1:]])
        row_coords = np.array([float(r[0]) for r in rows[1:]])
        values = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
        return cls(values=values, row_label=head[0], col_label=head[1],
                   row_coords=row_coords, col_coords=col_coords)


@dataclass
class ExperimentReport:
    config: dict
    summary: dict
    metrics: Optional[MetricsLog] = None
    arrays: dict = field(default_factory=dict)  # name -> LabeledArray

    def save(self, out_dir):
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "config.json"), "w") as fh:
            json.dump(self.config, fh, indent=2, sort_keys=True)
            fh.write("\n")
        with open(os.path.join(out_dir, "report.json"), "w") as fh:
            json.dump(_jsonable(self.summary), fh, indent=2, sort_keys=True)
            fh.write("\n")
        if self.metrics is not None:
            self.metrics.to_csv(os.path.join(out_dir, "metrics.csv"))
        if self.arrays:
            adir = os.path.join(out_dir, "arrays")
            os.makedirs(adir, exist_ok=True)
            for name, arr in self.arrays.items():
                arr.to_csv(os.path.join(adir, f"{name}.csv"))
        return out_dir


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj
