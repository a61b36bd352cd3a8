import subprocess
import sys

import numpy as np
import pytest

from ssimopt import _kernels, corpus, get_backend, set_backend
from ssimopt.apps import add_awgn


def _both(fn):
    old = get_backend()
    out = {}
    try:
        for b in ("numba", "numpy"):
            set_backend(b)
            out[b] = fn()
    finally:
        set_backend(old)
    return out["numba"], out["numpy"]


def test_newton_identity_parity():
    r = np.random.default_rng(3)
    Y = r.standard_normal((50, 64))
    A = Y + 0.3 * r.standard_normal(Y.shape)
    lam = r.uniform(0.01, 1.0, 50)
    (Xa, _, ca), (Xb, _, cb) = _both(lambda: _kernels.newton_identity(Y, A, lam, tol=1e-12))
    assert ca.all() and cb.all()
    np.testing.assert_allclose(Xa, Xb, atol=1e-12)


def test_chambolle_parity():
    V = add_awgn(corpus.load("portrait")[:64, :64], seed=1)
    (Ua, pa, ia, _), (Ub, pb, ib, _) = _both(lambda: _kernels.chambolle(V, 0.05, tol=1e-6))
    assert ia == ib
    np.testing.assert_allclose(Ua, Ub, atol=1e-12)
    np.testing.assert_allclose(pa[0], pb[0], atol=1e-12)


def test_zero_rows_and_warm_start(backend):
    Y = np.zeros((2, 4))
    Y[1] = [1.0, -1.0, 0.5, 0.0]
    X, _, conv = _kernels.newton_identity(Y, Y.copy(), 1.0, c=1e-3)
    np.testing.assert_allclose(X[1], Y[1], atol=1e-10)
    assert conv.all()


def test_set_backend_validation():
    with pytest.raises(ValueError):
        set_backend("cuda")


@pytest.mark.parametrize("value,expect", [("numpy", "numpy"), ("", "numba"), ("NUMBA", "numba")])
def test_env_selection(value, expect):
    code = "import ssimopt; print(ssimopt.get_backend())"
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                         env={"SSIMOPT_BACKEND": value, "PATH": ""}, check=True)
    assert out.stdout.strip() == expect


def test_env_rejects_unknown():
    out = subprocess.run([sys.executable, "-c", "import ssimopt"], capture_output=True,
                         text=True, env={"SSIMOPT_BACKEND": "gpu", "PATH": ""})
    assert out.returncode != 0 and "SSIMOPT_BACKEND" in out.stderr
