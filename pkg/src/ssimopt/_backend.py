"""Kernel backend selection.

The hot loops (batched identity-operator Newton solves and Chambolle's TV
iteration) exist twice: a numba ``@njit`` version and a vectorised numpy
version. ``SSIMOPT_BACKEND=numpy`` forces the numpy path; the default is
numba when it imports, numpy otherwise.
"""

import os

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

_VALID = ("numba", "numpy")


def _initial_backend():
    requested = os.environ.get("SSIMOPT_BACKEND", "").strip().lower()
    if requested == "numpy":
        return "numpy"
    if requested not in ("", "numba"):
        raise ValueError(f"SSIMOPT_BACKEND must be one of {_VALID}, got {requested!r}")
    return "numba" if HAVE_NUMBA else "numpy"


_backend = _initial_backend()


def get_backend():
    return _backend


def set_backend(name):
    """Switch the kernel backend at runtime (tests and benchmarks use this)."""
    global _backend
    if name not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}, got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not importable")
    _backend = name
