"""Generalized Newton method for ``min_x T(Phi x, y) + lam ||x - z||^2``.

Stationary points are the zeros of

    f(x) = [s(x) Phi^T Phi + lam r(x) I] x - lam r(x) z - Phi^T y,

with ``s(x) = 1 - T(Phi x, y)`` and ``r(x) = ||Phi x||^2 + ||y||^2 + C``;
``f`` equals ``r(x)/2`` times the gradient of the objective.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla

from .core.metrics import dissim_T
from .core.operators import LinearMap
from .report import SolveReport, SolverError


@dataclass
class NewtonProblem:
    operator: LinearMap
    y: np.ndarray
    anchor: np.ndarray
    reg: float
    c: float = 0.0
    _gram: np.ndarray = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=np.float64).ravel()
        self.anchor = np.asarray(self.anchor, dtype=np.float64).ravel()
        if self.y.size != self.operator.out_dim:
            raise ValueError("data size does not match operator output")
        if self.anchor.size != self.operator.in_dim:
            raise ValueError("anchor size does not match operator input")
        if self.reg < 0 or self.c < 0:
            raise ValueError("reg and c must be non-negative")
        if self.c == 0 and not np.any(self.y):
            raise ValueError("y must be nonzero when c = 0")

    @property
    def n(self):
        return self.operator.in_dim

    def phi(self, x):
        return self.operator.apply(x).ravel()

    def phi_t(self, v):
        return self.operator.adjoint(v).ravel()

    def gram_matrix(self):
        if self._gram is None:
            M = self.operator.to_matrix()
            self._gram = M.T @ M
        return self._gram


def _sr(x, p):
    a = p.phi(x)
    r = a @ a + p.y @ p.y + p.c
    if r <= 0.0:
        raise ValueError("zero denominator r(x)")
    s = (2.0 * (a @ p.y) + p.c) / r
    return a, s, r


def objective(x, p):
    x = np.asarray(x, dtype=np.float64).ravel()
    d = x - p.anchor
    return dissim_T(p.phi(x), p.y, p.c) + p.reg * (d @ d)


def objective_gradient(x, p):
    x = np.asarray(x, dtype=np.float64).ravel()
    _, _, r = _sr(x, p)
    return 2.0 * f_residual(x, p) / r


def f_residual(x, p):
    x = np.asarray(x, dtype=np.float64).ravel()
    a, s, r = _sr(x, p)
    return s * p.phi_t(a) + p.reg * r * (x - p.anchor) - p.phi_t(p.y)


def _jac_parts(x, p):
    a, s, r = _sr(x, p)
    gx = p.phi_t(a)
    grad_r = 2.0 * gx
    grad_s = (2.0 * p.phi_t(p.y) - s * grad_r) / r
    return gx, s, r, grad_s, grad_r


def jacobian(x, p):
    """Dense ``J_f(x) = G x grad_s^T + s G + lam (x - z) grad_r^T + lam r I``."""
    x = np.asarray(x, dtype=np.float64).ravel()
    gx, s, r, grad_s, grad_r = _jac_parts(x, p)
    J = np.outer(gx, grad_s) + s * p.gram_matrix() + p.reg * np.outer(x - p.anchor, grad_r)
    J[np.diag_indices_from(J)] += p.reg * r
    return J


def jacobian_operator(x, p):
    """Matrix-free ``J_f(x)`` as a scipy LinearOperator."""
    x = np.asarray(x, dtype=np.float64).ravel()
    gx, s, r, grad_s, grad_r = _jac_parts(x, p)
    dz = x - p.anchor

    def mv(v):
        return gx * (grad_s @ v) + s * p.phi_t(p.phi(v)) + p.reg * dz * (grad_r @ v) + p.reg * r * v

    return spla.LinearOperator((p.n, p.n), matvec=mv, dtype=np.float64)


# --------------------------------------------------------------------------
# Lipschitz bound and Kantorovich condition
# --------------------------------------------------------------------------


@dataclass
class LipschitzBound:
    k1: float
    k2: float
    k3: float
    k4: float
    k5: float
    sigma_omega: float
    rho_omega: float
    L: float


def lipschitz_bound(p, center, radius):
    """Lipschitz constant of ``J_f`` on the ball ``Omega = B(center, radius)``.

    Constants follow the bound ``L = (K2 + K3) ||G||_F + lam (K5 ||z|| + K1 + K4)``
    with ``G = Phi^T Phi`` and ``Phi_j`` the j-th column of ``Phi``.
    """
    ny = float(np.linalg.norm(p.y))
    if ny == 0.0:
        raise ValueError("y must be nonzero")
    M = p.operator.to_matrix()
    G = M.T @ M
    n = M.shape[1]
    sigma = 2.0 * float(radius)
    rho = float(np.linalg.norm(center)) + float(radius)
    norm_phi = float(np.linalg.norm(M, 2)) if M.size else 0.0
    norm_g2 = float(np.linalg.norm(G, 2)) if G.size else 0.0
    norm_gf = float(np.linalg.norm(G, "fro"))
    cols = np.linalg.norm(M, axis=0)
    k1 = 2.0 * norm_g2 * (sigma + rho)
    k2 = (math.sqrt(2.0) + 1.0) * norm_phi / ny
    kij = ((math.sqrt(2.0) + 3.0) * np.outer(cols, cols) / ny**2
           + (2.0 * math.sqrt(3.0) + 2.0) * cols[None, :] / ny**3)
    k3 = n * float(kij.max())
    k4 = float(np.max(2.0 * n * k1 * cols[None, :] * (cols[:, None] + norm_phi)))
    k5 = 2.0 * norm_gf
    zn = float(np.linalg.norm(p.anchor))
    L = (k2 + k3) * norm_gf + p.reg * (k5 * zn + k1 + k4)
    return LipschitzBound(k1, k2, k3, k4, k5, sigma, rho, L)


def kantorovich_check(x0, p, L):
    """``h = L ||J^-1|| ||J^-1 f(x0)||``; Newton converges from ``x0`` when h <= 1/2."""
    J = jacobian(x0, p)
    if not np.all(np.isfinite(J)) or np.linalg.cond(J) > 1.0 / np.finfo(float).eps:
        raise SolverError("Jacobian is singular at x0")
    Jinv = np.linalg.inv(J)
    step = Jinv @ f_residual(x0, p)
    h = float(L * np.linalg.norm(Jinv, 2) * np.linalg.norm(step))
    return h, h <= 0.5


# --------------------------------------------------------------------------
# solver
# --------------------------------------------------------------------------


def gauss_seidel(A, b, x0=None, tol=1e-10, max_sweeps=200):
    """Gauss-Seidel sweeps for ``A x = b``. Returns ``(x, converged)``."""
    L = np.tril(A)
    U = A - L
    x = np.zeros_like(b) if x0 is None else x0.copy()
    nb = max(np.linalg.norm(b), 1e-300)
    for _ in range(max_sweeps):
        x = scipy.linalg.solve_triangular(L, b - U @ x, lower=True, check_finite=False)
        res = np.linalg.norm(A @ x - b) / nb
        if not np.isfinite(res):
            return x, False
        if res <= tol:
            return x, True
    return x, False


def _direction(x, f, p, method, info):
    if method == "gmres":
        d, code = spla.gmres(jacobian_operator(x, p), -f, rtol=1e-10, atol=0.0, restart=50,
                             maxiter=50)
        if code != 0:
            info["inexact_steps"] += 1
        return d
    J = jacobian(x, p)
    if method == "gauss_seidel":
        d, ok = gauss_seidel(J, -f)
        if ok:
            return d
        info["gs_fallbacks"] += 1
    try:
        d = np.linalg.solve(J, -f)
        if np.all(np.isfinite(d)):
            return d
    except np.linalg.LinAlgError:
        pass
    info["singular_steps"] += 1
    return np.linalg.lstsq(J, -f, rcond=None)[0]


def default_start(p):
    if p.reg > 0:
        return p.anchor.copy()
    v = p.phi_t(p.y)
    pv = p.phi(v)
    npv = np.linalg.norm(pv)
    if npv == 0.0:
        return v
    return v * (np.linalg.norm(p.y) / npv)


def newton_solve(p, x0=None, tol=None, max_iter=100, linear_solver="auto", center=False,
                 max_halvings=30):
    """Damped Newton iteration on ``f``.

    Full steps are kept whenever they decrease ``||f||``; otherwise the step is
    halved up to ``max_halvings`` times. ``linear_solver`` is ``"direct"``,
    ``"gauss_seidel"`` (with direct fallback), ``"gmres"`` (matrix-free) or
    ``"auto"`` (direct up to n = 4096, gmres beyond).
    """
    t0 = time.perf_counter()
    mean = 0.0
    if center:
        mean = float(p.y.mean())
        p = NewtonProblem(p.operator, p.y - mean, p.anchor, p.reg, p.c)
    n = p.n
    if tol is None:
        tol = 1e-9 * math.sqrt(n)
    if linear_solver == "auto":
        linear_solver = "direct" if n <= 4096 else "gmres"
    if linear_solver not in ("direct", "gauss_seidel", "gmres"):
        raise ValueError(f"unknown linear solver {linear_solver!r}")
    x = default_start(p) if x0 is None else np.asarray(x0, dtype=np.float64).ravel().copy()
    info = {"singular_steps": 0, "gs_fallbacks": 0, "inexact_steps": 0}
    f = f_residual(x, p)
    fn = float(np.linalg.norm(f))
    trace = [{"k": 0, "fnorm": fn, "step": 0.0}]
    status = "max_iter"
    k = 0
    while True:
        if fn <= tol:
            status = "ok"
            break
        if k >= max_iter:
            break
        d = _direction(x, f, p, linear_solver, info)
        t = 1.0
        accepted = False
        for _ in range(max_halvings + 1):
            xt = x + t * d
            ft = f_residual(xt, p)
            fnt = float(np.linalg.norm(ft))
            if fnt < fn:
                accepted = True
                break
            t *= 0.5
        k += 1
        if not accepted:
            status = "stalled"
            trace.append({"k": k, "fnorm": fn, "step": 0.0})
            break
        x, f, fn = xt, ft, fnt
        trace.append({"k": k, "fnorm": fn, "step": t})
    return SolveReport(x=x, converged=status == "ok", iterations=k, objective=objective(x, p),
                       status=status, trace=trace, data_mean=mean,
                       runtime=time.perf_counter() - t0, info=info)
