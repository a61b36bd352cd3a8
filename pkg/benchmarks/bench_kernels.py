"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5]

Each kernel is run once per backend to warm up (numba compiles on first
call), then timed ``--repeat`` times; the best time is reported together
with the largest output difference between the backends.
"""

import argparse
import time

import numpy as np

from ssimopt import corpus, set_backend
from ssimopt._kernels import chambolle, newton_identity
from ssimopt.apps import add_awgn


def _best(fn, repeat):
    fn()
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _newton_case():
    rng = np.random.default_rng(0)
    Y = rng.standard_normal((4096, 64))
    A = Y + 0.3 * rng.standard_normal(Y.shape)
    return lambda: newton_identity(Y, A, 0.05, tol=1e-12)[0]


def _chambolle_case():
    V = add_awgn(corpus.load("portrait"), seed=1)
    return lambda: chambolle(V, 0.05, tol=0.0, max_iter=200)[0]


CASES = {
    "newton_identity 4096x64": _newton_case,
    "chambolle 128x128, 200 sweeps": _chambolle_case,
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    print(f"{'kernel':32s} {'numba [ms]':>11s} {'numpy [ms]':>11s} {'speedup':>8s} {'max diff':>10s}")
    try:
        for name, make in CASES.items():
            fn = make()
            times, outs = {}, {}
            for backend in ("numba", "numpy"):
                set_backend(backend)
                times[backend] = _best(fn, args.repeat)
                outs[backend] = fn()
            diff = float(np.max(np.abs(outs["numba"] - outs["numpy"])))
            print(f"{name:32s} {1e3 * times['numba']:11.2f} {1e3 * times['numpy']:11.2f} "
                  f"{times['numpy'] / times['numba']:8.1f} {diff:10.2e}")
    finally:
        set_backend("numba")


if __name__ == "__main__":
    main()
