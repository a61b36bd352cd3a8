"""Proximal operators used as z-updates: l1, Tikhonov and isotropic TV."""

import numpy as np
import scipy.sparse.linalg as spla

from . import _kernels
from .report import ConvergenceError


def soft_threshold(v, tau):
    """Elementwise ``sign(v) max(|v| - tau, 0)``; the prox of ``tau ||.||_1``."""
    tau = np.asarray(tau, dtype=np.float64)
    if np.any(tau < 0):
        raise ValueError("threshold must be non-negative")
    v = np.asarray(v, dtype=np.float64)
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def prox_tikhonov(v, a_map, t, tol=1e-10, max_iter=None):
    """Solve ``(2 t A^T A + I) z = v`` (prox of ``t ||A z||^2``) by CG."""
    if t <= 0:
        raise ValueError("scale t must be positive")
    v = np.asarray(v, dtype=np.float64)
    shape = v.shape
    n = v.size

    def mv(u):
        u = u.reshape(a_map.in_shape)
        return (2.0 * t * a_map.gram(u)).ravel() + u.ravel()

    op = spla.LinearOperator((n, n), matvec=mv, dtype=np.float64)
    z, info = spla.cg(op, v.ravel(), rtol=tol, atol=0.0, maxiter=max_iter or 10 * n)
    if info != 0:
        res = np.linalg.norm(mv(z) - v.ravel()) / max(np.linalg.norm(v), 1e-300)
        raise ConvergenceError(f"Tikhonov prox CG stalled, relative residual {res:.3e}")
    return z.reshape(shape)


def _as_image(X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        return X[None, :]
    if X.ndim != 2:
        raise ValueError("TV is defined for 1-D or 2-D arrays")
    return X


def tv_seminorm(X):
    """Isotropic TV with forward differences (zero on the last row/column)."""
    gx, gy = _kernels.forward_grad(_as_image(X))
    return float(np.sum(np.sqrt(gx * gx + gy * gy)))


def prox_tv_chambolle(V, t, tol=1e-5, max_iter=500, tau=0.248, warm=None, return_info=False):
    """``argmin_Z t TV(Z) + 0.5 ||Z - V||_F^2`` by Chambolle's dual iteration.

    ``warm`` is a dual field ``(px, py)`` from a previous call. With
    ``return_info`` the dual field, iteration count and last relative change
    are returned as well; the change exceeds ``tol`` when the cap was hit.
    """
    if t <= 0:
        raise ValueError("scale t must be positive")
    V = np.asarray(V, dtype=np.float64)
    img = _as_image(V)
    U, p, it, change = _kernels.chambolle(img, t, tau=tau, tol=tol, max_iter=max_iter, p0=warm)
    U = U.reshape(V.shape)
    if return_info:
        return U, {"dual": p, "iterations": it, "change": change, "converged": change <= tol}
    return U
