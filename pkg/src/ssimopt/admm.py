"""ADMM drivers for ``min_x F(Phi x, y) + lam h(x)`` with ``F`` the SSIM
dissimilarity ``T`` (or its block average ``MT``) or a squared error.

``admm3_solve`` splits ``x = z`` and solves the x-update with Newton's method;
``admm4_solve`` additionally splits ``w = Phi x`` so that the nonlinear part
only ever sees the identity operator and the x-update is a linear solve.
Both use the scaled dual form.
"""

import math
import time
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from . import _kernels
from .core.blocks import BlockScheme
from .core.metrics import dissim_T, mssim, mt_fidelity
from .core.operators import IdentityMap, LinearMap, identity
from .newton import NewtonProblem, newton_solve
from .prox import prox_tikhonov, prox_tv_chambolle, soft_threshold, tv_seminorm
from .report import SolveReport, SolverError

REGULARIZERS = ("l1", "tikhonov", "tv")
FIDELITIES = ("ssim", "l2")


@dataclass
class SplitProblem:
    """Problem data. ``scheme`` switches the SSIM fidelity to the blockwise
    ``MT`` form on raw (mean-keeping) blocks."""

    operator: LinearMap
    y: np.ndarray
    regularizer: str = "l1"
    lam: Any = 1.0
    rho: float = 1.0
    mu: float = 1.0
    scheme: Optional[BlockScheme] = None
    reg_map: Optional[LinearMap] = None
    fidelity: str = "ssim"
    c: float = 0.0

    def __post_init__(self):
        if self.regularizer not in REGULARIZERS:
            raise ValueError(f"regularizer must be one of {REGULARIZERS}")
        if self.fidelity not in FIDELITIES:
            raise ValueError(f"fidelity must be one of {FIDELITIES}")
        self.y = np.asarray(self.y, dtype=np.float64).reshape(self.operator.out_shape)
        lam = np.asarray(self.lam, dtype=np.float64)
        if np.any(lam <= 0) or self.rho <= 0 or self.mu <= 0:
            raise ValueError("lam, rho and mu must be positive")
        if lam.ndim and self.regularizer != "l1":
            raise ValueError("entrywise lam is only supported for the l1 regularizer")
        if self.regularizer == "tikhonov" and self.reg_map is None:
            self.reg_map = identity(self.operator.in_shape)
        if self.scheme is not None and len(self.operator.out_shape) != 2:
            raise ValueError("blockwise fidelity needs image-shaped data")

    @property
    def blockwise(self):
        return self.scheme is not None and self.fidelity == "ssim"

    def lam_array(self, shape):
        lam = np.asarray(self.lam, dtype=np.float64)
        return lam if lam.ndim == 0 else lam.reshape(shape)

    def reg_value(self, x):
        x = np.asarray(x).reshape(self.operator.in_shape)
        if self.regularizer == "l1":
            return float(np.sum(self.lam_array(x.shape) * np.abs(x)))
        if self.regularizer == "tikhonov":
            a = self.reg_map.apply(x)
            return float(self.lam) * float(np.vdot(a, a))
        return float(self.lam) * tv_seminorm(x)

    def fidelity_value(self, a, y):
        if self.fidelity == "l2":
            return float(np.sum((a - y) ** 2))
        if self.blockwise:
            return mt_fidelity(a, y, self.scheme, self.c)
        return dissim_T(a, y, self.c)

    def prox(self, v, scale, warm=None, tol=1e-7, max_iter=2000):
        """``prox_{scale h}(v)``; returns ``(z, warm_state)``."""
        if self.regularizer == "l1":
            return soft_threshold(v, self.lam_array(v.shape) * scale), None
        if self.regularizer == "tikhonov":
            return prox_tikhonov(v, self.reg_map, float(self.lam) * scale), None
        z, info = prox_tv_chambolle(v, float(self.lam) * scale, tol=tol, max_iter=max_iter, warm=warm,
                                    return_info=True)
        return z, info["dual"]


@dataclass
class AdmmState:
    x: np.ndarray
    z: np.ndarray
    u: np.ndarray
    z_prev: np.ndarray
    rho: float
    w: Optional[np.ndarray] = None
    v: Optional[np.ndarray] = None
    w_prev: Optional[np.ndarray] = None
    mu: float = 1.0
    operator: Optional[LinearMap] = None
    iteration: int = 0
    primal_residual: float = math.inf
    dual_residual: float = math.inf


def residuals(state):
    """``(primal, dual)``. Three-block states (with ``w``) combine both
    constraint blocks by root-sum-square."""
    x, z = state.x, state.z
    primal = float(np.linalg.norm(x - z))
    dual = state.rho * float(np.linalg.norm(z - state.z_prev))
    if state.w is None:
        return primal, dual
    op = state.operator or IdentityMap(np.shape(x))
    pw = float(np.linalg.norm(op.apply(x) - state.w))
    dw = state.rho * float(np.linalg.norm(op.adjoint(state.w - state.w_prev)))
    dz = state.mu * float(np.linalg.norm(z - state.z_prev))
    return math.hypot(primal, pw), math.hypot(dw, dz)


# --------------------------------------------------------------------------
# blockwise updates
# --------------------------------------------------------------------------


def _block_rows_lam(scheme, shape, rho):
    return np.full(scheme.count(shape), scheme.count(shape) * rho / 2.0)


def blockwise_x_update(X, Z, U, Y, scheme, rho, c=0.0, tol=1e-10, X0=None, max_iter=50):
    """Per-block ``argmin T(X_i, Y_i) + (N rho / 2) ||X_i - Z_i + U_i||_F^2``.

    Blocks are independent; the image is reassembled in block order. Raises
    :class:`SolverError` naming the first block whose Newton solve failed.
    """
    del X  # the previous iterate is only a warm start; see X0
    Y = np.asarray(Y, dtype=np.float64)
    A = np.asarray(Z, dtype=np.float64) - np.asarray(U, dtype=np.float64)
    shape = Y.shape
    Yr = scheme.pack(Y)
    Ar = scheme.pack(A)
    X0r = scheme.pack(X0) if X0 is not None else None
    Xr, _, conv = _kernels.newton_identity(Yr, Ar, _block_rows_lam(scheme, shape, rho), X0=X0r,
                                           c=c, tol=tol, max_iter=max_iter)
    if not np.all(np.isfinite(Xr)):
        bad = int(np.flatnonzero(~np.all(np.isfinite(Xr), axis=1))[0])
        raise SolverError(f"block {bad}: Newton produced non-finite values")
    return scheme.unpack(Xr, shape), conv


def _aligned_block_dct(op, scheme):
    blk = getattr(op, "params", {}).get("block") if getattr(op, "kind", "") == "block_dct" else None
    return blk is not None and tuple(blk) == (scheme.block_rows, scheme.block_cols)


# --------------------------------------------------------------------------
# stopping rule
# --------------------------------------------------------------------------


def _inner_tol(primal, dual, lo=1e-10, hi=1e-6):
    return float(min(hi, max(lo, 1e-3 * (primal + dual))))


def _make_report(x, k, converged, trace, mean, t0, info, objective):
    status = "ok" if converged else "max_iter"
    return SolveReport(x=x, converged=converged, iterations=k, objective=objective, status=status,
                       trace=trace, data_mean=mean, runtime=time.perf_counter() - t0, info=info)


def _prepare(p, center):
    if center is None:
        center = not p.blockwise
    mean = 0.0
    y = p.y
    if center:
        mean = float(y.mean())
        y = y - mean
    return y, mean


# --------------------------------------------------------------------------
# two-block splitting
# --------------------------------------------------------------------------


def admm3_solve(p, max_iter=500, eps_abs=1e-6, eps_rel=1e-4, x0=None, z0=None, u0=None,
                center=None, reference=None, prox_tol=1e-7, prox_max_iter=2000,
                newton_max_iter=50, warm=None):
    """Two-block ADMM: Newton x-update, prox z-update, scaled dual ``u``.

    In vector mode the data are mean-subtracted first (``center`` default);
    the mean is returned in ``data_mean``. In blockwise mode the block means
    are kept. The returned solution is ``z``.
    """
    t0 = time.perf_counter()
    op = p.operator
    y, mean = _prepare(p, center)
    shape = op.in_shape
    n = op.in_dim
    rho = float(p.rho)
    ident = isinstance(op, IdentityMap)
    if p.blockwise:
        if ident:
            y_blocks = y
        elif _aligned_block_dct(op, p.scheme):
            y_blocks = op.adjoint(y)
        else:
            raise ValueError("blockwise x-update needs an identity or aligned block-DCT operator; "
                             "use admm4_solve for other operators")
    x = op.initial_guess(y) if x0 is None else np.asarray(x0, dtype=np.float64).reshape(shape)
    z = x.copy() if z0 is None else np.asarray(z0, dtype=np.float64).reshape(shape)
    u = np.zeros(shape) if u0 is None else np.asarray(u0, dtype=np.float64).reshape(shape)
    trace = []
    info = {"inner_unconverged": 0, "al_increases": 0}
    primal = dual = math.inf
    prev_al = math.inf
    converged = False
    k = 0
    while k < max_iter:
        k += 1
        itol = _inner_tol(primal, dual)
        anchor = z - u
        if p.blockwise:
            x, conv = blockwise_x_update(x, z, u, y_blocks, p.scheme, rho, c=p.c, tol=itol, X0=x,
                                         max_iter=newton_max_iter)
            info["inner_unconverged"] += int(np.count_nonzero(~conv))
        elif p.fidelity == "l2":
            x = op.solve_shifted(2.0, rho, 2.0 * op.adjoint(y) + rho * anchor)
        elif ident:
            X, _, conv = _kernels.newton_identity(y.reshape(1, -1), anchor.reshape(1, -1),
                                                  rho / 2.0, X0=x.reshape(1, -1), c=p.c,
                                                  tol=itol, max_iter=newton_max_iter)
            x = X.reshape(shape)
            info["inner_unconverged"] += int(not conv[0])
        else:
            np_ = NewtonProblem(op, y, anchor, rho / 2.0, p.c)
            scale = np.linalg.norm(op.adjoint(y)) + rho * np.linalg.norm(y) ** 2 * np.linalg.norm(anchor)
            rep = newton_solve(np_, x0=x, tol=itol * max(scale, 1e-300),
                               max_iter=newton_max_iter)
            x = rep.x.reshape(shape)
            info["inner_unconverged"] += int(not rep.converged)
        if not np.all(np.isfinite(x)):
            raise SolverError(f"x-update produced non-finite values at iteration {k}")
        z_prev = z
        z, warm = p.prox(x + u, 1.0 / rho, warm, prox_tol, prox_max_iter)
        u = u + x - z
        primal, dual = residuals(AdmmState(x, z, u, z_prev, rho))
        eps_pri = math.sqrt(n) * eps_abs + eps_rel * max(np.linalg.norm(x), np.linalg.norm(z))
        eps_dual = math.sqrt(n) * eps_abs + eps_rel * rho * np.linalg.norm(u)
        fid = p.fidelity_value(op.apply(z), y)
        obj = fid + p.reg_value(z)
        al = (p.fidelity_value(op.apply(x), y) + p.reg_value(z)
              + 0.5 * rho * float(np.sum((x - z + u) ** 2)) - 0.5 * rho * float(np.sum(u * u)))
        if al > prev_al + 1e-6:
            info["al_increases"] += 1
        prev_al = al
        row = {"k": k, "objective": obj, "primal_res": primal, "dual_res": dual}
        if reference is not None:
            row["mssim"] = mssim(op.apply(z) + mean, reference, p.scheme or BlockScheme())
        trace.append(row)
        if primal <= eps_pri and dual <= eps_dual:
            converged = True
            break
    info.update(x=x, u=u, warm=warm)
    return _make_report(z, k, converged, trace, mean, t0, info,
                        p.fidelity_value(op.apply(z), y) + p.reg_value(z))


# --------------------------------------------------------------------------
# three-block splitting
# --------------------------------------------------------------------------


def admm4_solve(p, max_iter=500, eps_abs=1e-6, eps_rel=1e-4, x0=None, center=None,
                reference=None, prox_tol=1e-7, prox_max_iter=2000, newton_max_iter=50,
                state=None):
    """Three-block ADMM with splittings ``w = Phi x`` and ``z = x``.

    x-update: ``(rho Phi^T Phi + mu I) x = rho Phi^T (w - u) + mu (z - v)``;
    w-update: Newton on ``T(w, y) + rho/2 ||w - Phi x - u||^2`` (blockwise in
    MT mode, closed form for the squared-error fidelity); z-update: prox of
    ``(lam / mu) h`` at ``x + v``. ``state`` (a dict from a previous report's
    ``info``) warm starts every variable.
    """
    t0 = time.perf_counter()
    op = p.operator
    y, mean = _prepare(p, center)
    shape, oshape = op.in_shape, op.out_shape
    n, m = op.in_dim, op.out_dim
    rho, mu = float(p.rho), float(p.mu)
    if state is not None:
        x, z, w = state["x"].copy(), state["z"].copy(), state["w"].copy()
        u, v, warm = state["u"].copy(), state["v"].copy(), state.get("warm")
    else:
        x = op.initial_guess(y) if x0 is None else np.asarray(x0, dtype=np.float64).reshape(shape)
        z = x.copy()
        w = op.apply(x)
        u = np.zeros(oshape)
        v = np.zeros(shape)
        warm = None
    trace = []
    info = {"inner_unconverged": 0}
    primal = dual = math.inf
    converged = False
    k = 0
    while k < max_iter:
        k += 1
        itol = _inner_tol(primal, dual)
        x = op.solve_shifted(rho, mu, rho * op.adjoint(w - u) + mu * (z - v))
        ax = op.apply(x)
        w_prev = w
        target = ax + u
        if p.fidelity == "l2":
            w = (2.0 * y + rho * target) / (2.0 + rho)
        elif p.blockwise:
            w, conv = blockwise_x_update(None, target, np.zeros(oshape), y, p.scheme, rho, c=p.c,
                                         tol=itol, X0=w, max_iter=newton_max_iter)
            info["inner_unconverged"] += int(np.count_nonzero(~conv))
        else:
            W, _, conv = _kernels.newton_identity(y.reshape(1, -1), target.reshape(1, -1),
                                                  rho / 2.0, X0=w.reshape(1, -1), c=p.c,
                                                  tol=itol, max_iter=newton_max_iter)
            w = W.reshape(oshape)
            info["inner_unconverged"] += int(not conv[0])
        if not np.all(np.isfinite(w)):
            raise SolverError(f"w-update produced non-finite values at iteration {k}")
        z_prev = z
        z, warm = p.prox(x + v, 1.0 / mu, warm, prox_tol, prox_max_iter)
        u = u + ax - w
        v = v + x - z
        st = AdmmState(x, z, u, z_prev, rho, w=w, v=v, w_prev=w_prev, mu=mu, operator=op)
        primal, dual = residuals(st)
        eps_pri = (math.sqrt(n + m) * eps_abs + eps_rel
                   * max(math.hypot(np.linalg.norm(ax), np.linalg.norm(x)),
                         math.hypot(np.linalg.norm(w), np.linalg.norm(z))))
        eps_dual = math.sqrt(n) * eps_abs + eps_rel * np.linalg.norm(rho * op.adjoint(u) + mu * v)
        obj = p.fidelity_value(op.apply(z), y) + p.reg_value(z)
        row = {"k": k, "objective": obj, "primal_res": primal, "dual_res": dual}
        if reference is not None:
            row["mssim"] = mssim(z + mean, reference, p.scheme or BlockScheme())
        trace.append(row)
        if primal <= eps_pri and dual <= eps_dual:
            converged = True
            break
    info.update(x=x, z=z, w=w, u=u, v=v, warm=warm)
    return _make_report(z, k, converged, trace, mean, t0, info,
                        p.fidelity_value(op.apply(z), y) + p.reg_value(z))


# --------------------------------------------------------------------------
# many independent small l1 problems at once
# --------------------------------------------------------------------------


@dataclass
class RowsState:
    X: np.ndarray
    Z: np.ndarray
    U: np.ndarray
    iterations: np.ndarray = field(default=None)
    converged: np.ndarray = field(default=None)


def admm3_l1_rows(C, lam, rho=1.0, state=None, max_iter=500, eps_abs=1e-6, eps_rel=1e-4,
                  newton_max_iter=50):
    """Two-block ADMM with identity operator and l1 penalty on every row of ``C``.

    Solves ``min_x T(x, c_i) + lam_i ||x||_1`` for all rows simultaneously.
    ``rho`` is scaled per row by ``1 / ||c_i||^2`` so that the penalty matches
    the curvature of ``T`` irrespective of the row's energy. Rows equal to
    zero have the solution zero. Each row stops on its own residuals.
    """
    C = np.asarray(C, dtype=np.float64)
    N, n = C.shape
    lam = np.broadcast_to(np.asarray(lam, dtype=np.float64), (N,)).copy()
    energy = np.einsum("ij,ij->i", C, C)
    flat = energy == 0.0
    rho_i = np.where(flat, 1.0, rho / np.where(flat, 1.0, energy))
    if state is None:
        X = C.copy()
        Z = C.copy()
        U = np.zeros_like(C)
    else:
        X, Z, U = state.X.copy(), state.Z.copy(), state.U.copy()
    X[flat] = Z[flat] = U[flat] = 0.0
    iters = np.zeros(N, dtype=np.int64)
    conv = flat.copy()
    active = np.flatnonzero(~flat)
    prim = np.full(N, np.inf)
    dual = np.full(N, np.inf)
    k = 0
    sq = math.sqrt(n)
    while active.size and k < max_iter:
        k += 1
        a = active
        itol = _inner_tol(float(np.max(prim[a])), float(np.max(dual[a])))
        Xa, _, _ = _kernels.newton_identity(C[a], Z[a] - U[a], rho_i[a] / 2.0, X0=X[a], tol=itol,
                                            max_iter=newton_max_iter)
        thr = (lam[a] / rho_i[a])[:, None]
        Za = soft_threshold(Xa + U[a], thr)
        Ua = U[a] + Xa - Za
        pr = np.linalg.norm(Xa - Za, axis=1)
        du = rho_i[a] * np.linalg.norm(Za - Z[a], axis=1)
        X[a], Z[a], U[a] = Xa, Za, Ua
        prim[a], dual[a] = pr, du
        iters[a] = k
        e_pri = sq * eps_abs * np.sqrt(energy[a]) + eps_rel * np.maximum(
            np.linalg.norm(Xa, axis=1), np.linalg.norm(Za, axis=1))
        e_dual = sq * eps_abs / np.sqrt(energy[a]) + eps_rel * rho_i[a] * np.linalg.norm(Ua, axis=1)
        done = (pr <= e_pri) & (du <= e_dual)
        conv[a[done]] = True
        active = a[~done]
    return RowsState(X, Z, U, iters, conv)
