"""CDF curves on a time grid, with their certified truncation error."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._io import csv_text, write_csv


@dataclass(frozen=True)
class DistributionCurve:
    times: np.ndarray
    values: np.ndarray
    err_bound: float
    kind: str  # "hitting" | "meeting"
    speed_scale: float
    degenerate: bool = False
    meta: dict = field(default_factory=dict)

    def rows(self):
        for t, v in zip(self.times, self.values):
            yield float(t), float(v), float(self.err_bound)

    def to_csv(self) -> str:
        return csv_text(("t", "value", "err_bound"), self.rows())

    def write_csv(self, path):
        return write_csv(path, ("t", "value", "err_bound"), self.rows())

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "speed_scale": self.speed_scale,
            "err_bound": self.err_bound,
            "degenerate": self.degenerate,
            "times": np.asarray(self.times).tolist(),
            "values": np.asarray(self.values).tolist(),
            **self.meta,
        }


def as_grid(t_grid) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if t.ndim != 1 or np.any(~np.isfinite(t)) or np.any(t < 0):
        raise ValueError("time grid must be a finite, nonnegative 1-d array")
    return t
