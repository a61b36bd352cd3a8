"""SSIM-based optimization for imaging: the dissimilarity T, bisection and
Newton solvers, ADMM splittings and TV/l1 pipelines."""

from ._backend import get_backend, set_backend
from .report import ConvergenceError, SolveReport, SolverError

__version__ = "0.1.0"

__all__ = ["ConvergenceError", "SolveReport", "SolverError", "get_backend", "set_backend",
           "__version__"]
