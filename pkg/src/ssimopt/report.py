"""Solver output container and trace export."""

import csv
import io
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from .core.pgm import atomic_write_bytes


class SolverError(RuntimeError):
    """A solver could not produce a usable result."""


class ConvergenceError(SolverError):
    """Iteration cap reached without meeting the stopping rule."""


@dataclass
class SolveReport:
    x: np.ndarray
    converged: bool
    iterations: int
    objective: Optional[float] = None
    status: str = "ok"
    trace: List[Dict[str, float]] = field(default_factory=list)
    data_mean: float = 0.0
    mssim: Optional[float] = None
    tv: Optional[float] = None
    l0: Optional[Any] = None
    runtime: Optional[float] = None
    info: Dict[str, Any] = field(default_factory=dict)

    def trace_csv(self, columns=None):
        """Trace as CSV text (header plus one row per iteration)."""
        if not self.trace:
            return ""
        columns = columns or list(self.trace[0].keys())
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for row in self.trace:
            w.writerow([_fmt(row.get(c, "")) for c in columns])
        return buf.getvalue()

    def write_trace(self, path, columns=None):
        atomic_write_bytes(path, self.trace_csv(columns).encode())


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v
