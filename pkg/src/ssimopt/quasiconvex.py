"""Bisection over convex feasibility problems for constrained T minimization.

``min_x T(Phi x, y)`` subject to convex constraints is solved by bisecting on
the level ``alpha``: the sublevel set ``{T(Phi x, y) <= alpha}`` coincides
(for ``(Phi x)^T y >= 0`` and C = 0) with ``{phi_alpha(x) <= 0}`` where

    phi_alpha(x) = (1 - alpha) ||Phi x - y||^2 - 2 alpha x^T Phi^T y,

which is convex for ``alpha <= 1``.
"""

import csv
import io
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core.metrics import dissim_T
from .core.operators import LinearMap, MatrixMap
from .core.pgm import atomic_write_bytes
from .prox import prox_tv_chambolle
from .report import SolverError

# --------------------------------------------------------------------------
# constraints
# --------------------------------------------------------------------------


class Constraint:
    """Convex set with a violation measure ``value`` (<= 0 inside) and a
    Euclidean projection."""

    def value(self, x):
        raise NotImplementedError

    def project(self, v):
        raise NotImplementedError


def project_l1_ball(v, radius):
    """Euclidean projection onto ``{x : ||x||_1 <= radius}`` (sort based)."""
    v = np.asarray(v, dtype=np.float64)
    if radius < 0:
        raise ValueError("radius must be non-negative")
    a = np.abs(v.ravel())
    if a.sum() <= radius:
        return v.copy()
    if radius == 0:
        return np.zeros_like(v)
    u = np.sort(a)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, u.size + 1)
    idx = np.nonzero(u * k > css - radius)[0]
    rho = idx[-1] if idx.size else 0  # radius below rounding of css
    theta = (css[rho] - radius) / (rho + 1.0)
    return (np.sign(v) * np.maximum(np.abs(v) - theta, 0.0)).reshape(v.shape)


class L1Ball(Constraint):
    def __init__(self, radius):
        if radius < 0:
            raise ValueError("radius must be non-negative")
        self.radius = float(radius)

    def value(self, x):
        return float(np.abs(x).sum() - self.radius)

    def project(self, v):
        return project_l1_ball(v, self.radius)


class Box(Constraint):
    def __init__(self, lo=-np.inf, hi=np.inf):
        self.lo = lo
        self.hi = hi
        if np.any(np.asarray(lo) > np.asarray(hi)):
            raise ValueError("empty box")

    def value(self, x):
        return float(max(np.max(self.lo - x), np.max(x - self.hi), -np.inf))

    def project(self, v):
        return np.clip(v, self.lo, self.hi)


class QuadraticBall(Constraint):
    """``||A x||_2^2 <= bound``; projection by bisection on the multiplier."""

    def __init__(self, a_map, bound):
        if bound < 0:
            raise ValueError("bound must be non-negative")
        A = a_map.to_matrix() if isinstance(a_map, LinearMap) else np.asarray(a_map, float)
        self.A = A
        self.bound = float(bound)
        lam, Q = np.linalg.eigh(A.T @ A)
        self._lam = np.clip(lam, 0.0, None)
        self._Q = Q

    def value(self, x):
        ax = self.A @ x
        return float(ax @ ax - self.bound)

    def project(self, v):
        if self.value(v) <= 0:
            return v.copy()
        w = self._Q.T @ v
        lam = self._lam

        def g(mu):
            return float(np.sum(lam * (w / (1.0 + mu * lam)) ** 2)) - self.bound

        lo, hi = 0.0, 1.0
        while g(hi) > 0:
            hi *= 2.0
            if hi > 1e300:
                break
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if g(mid) > 0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-15 * hi:
                break
        return self._Q @ (w / (1.0 + hi * lam))


class DifferenceL1Ball(Constraint):
    """``||D x||_1 <= radius`` with D the forward difference (1-D TV ball)."""

    def __init__(self, radius, tol=1e-12):
        if radius < 0:
            raise ValueError("radius must be non-negative")
        self.radius = float(radius)
        self.tol = tol

    def value(self, x):
        return float(np.abs(np.diff(x)).sum() - self.radius)

    def project(self, v):
        v = np.asarray(v, dtype=np.float64)
        if self.value(v) <= 0:
            return v.copy()
        if self.radius == 0:
            return np.full_like(v, v.mean())

        def prox(mu):
            return prox_tv_chambolle(v, mu, tol=self.tol, max_iter=20000)

        lo, hi = 0.0, float(np.abs(v).max()) * v.size + 1.0
        x = prox(hi)
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            xm = prox(mid)
            if self.value(xm) > 0:
                lo = mid
            else:
                hi, x = mid, xm
            if hi - lo <= 1e-12 * hi:
                break
        return x


class AffineEquality(Constraint):
    """``A x = b``."""

    def __init__(self, A, b):
        self.A = np.atleast_2d(np.asarray(A, dtype=np.float64))
        self.b = np.atleast_1d(np.asarray(b, dtype=np.float64))
        self._pinv = np.linalg.pinv(self.A)

    def value(self, x):
        return float(np.max(np.abs(self.A @ x - self.b)))

    def project(self, v):
        return v - self._pinv @ (self.A @ v - self.b)


def make_constraint(desc):
    """Build a constraint from a descriptor tuple.

    Accepted: ``("l1", radius)``, ``("box", lo, hi)``, ``("quadratic", A, bound)``,
    ``("diff_l1", radius)``, ``("eq", A, b)`` or a :class:`Constraint` instance.
    """
    if isinstance(desc, Constraint):
        return desc
    if not isinstance(desc, (tuple, list)) or not desc:
        raise ValueError(f"unsupported constraint descriptor {desc!r}")
    kind, *args = desc
    table = {"l1": L1Ball, "box": Box, "quadratic": QuadraticBall, "diff_l1": DifferenceL1Ball,
             "eq": AffineEquality}
    if kind not in table:
        raise ValueError(f"unsupported constraint descriptor {kind!r}")
    return table[kind](*args)


def project_intersection(v, constraints, tol=1e-12, max_iter=500):
    """Dykstra's alternating projections onto the intersection."""
    if not constraints:
        return v.copy()
    if len(constraints) == 1:
        return constraints[0].project(v)
    x = v.copy()
    incr = [np.zeros_like(v) for _ in constraints]
    for _ in range(max_iter):
        prev = x
        for i, c in enumerate(constraints):
            y = c.project(x + incr[i])
            incr[i] = x + incr[i] - y
            x = y
        if np.linalg.norm(x - prev) <= tol * (1.0 + np.linalg.norm(x)):
            break
    return x


# --------------------------------------------------------------------------
# feasibility problems
# --------------------------------------------------------------------------


def phi_alpha(x, phi, y, alpha):
    """``(1 - alpha) ||Phi x - y||^2 - 2 alpha x^T Phi^T y``."""
    if not 0.0 <= alpha <= 2.0:
        raise ValueError("alpha must lie in [0, 2]")
    a = phi.apply(x).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    d = a - y
    return float((1.0 - alpha) * (d @ d) - 2.0 * alpha * (a @ y))


def _grad_phi_alpha(x, phi, y, alpha):
    a = phi.apply(x).ravel()
    g = 2.0 * (1.0 - alpha) * (a - y) - 2.0 * alpha * y
    return phi.adjoint(g).ravel()


@dataclass
class FeasibilityProblem:
    alpha: float
    operator: LinearMap
    y: np.ndarray
    constraints: Sequence = ()
    equality: Optional[Tuple[np.ndarray, np.ndarray]] = None

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 2.0:
            raise ValueError("alpha must lie in [0, 2]")
        self.y = np.asarray(self.y, dtype=np.float64).ravel()
        cons = [make_constraint(c) for c in self.constraints]
        if self.equality is not None:
            cons.append(AffineEquality(*self.equality))
        self._cons = cons

    def violation(self, x):
        return max((c.value(x) for c in self._cons), default=-np.inf)

    def project(self, v):
        return project_intersection(v, self._cons)


def _minimize_phi(p, alpha, x0, tol, max_iter, stop_at_zero):
    """Projected accelerated gradient on ``phi_alpha`` over the constraints.
    Returns ``(x, best_value)``."""
    phi, y = p.operator, p.y
    nrm = phi.norm()
    L = 2.0 * max(1.0 - alpha, 1e-3) * max(nrm * nrm, 1e-300)
    step = 1.0 / L
    x = p.project(x0)
    best_x, best = x, phi_alpha(x, phi, y, alpha)
    if stop_at_zero and best <= 0.0 and p.violation(x) <= tol:
        return best_x, best
    z, t = x.copy(), 1.0
    for _ in range(max_iter):
        xn = p.project(z - step * _grad_phi_alpha(z, phi, y, alpha))
        val = phi_alpha(xn, phi, y, alpha)
        if val < best:
            best_x, best = xn, val
        if stop_at_zero and val <= 0.0 and p.violation(xn) <= tol:
            return xn, val
        tn = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        if val > phi_alpha(x, phi, y, alpha):
            z, tn = xn.copy(), 1.0  # restart on non-monotone step
        else:
            z = xn + ((t - 1.0) / tn) * (xn - x)
        moved = np.linalg.norm(xn - x)
        x, t = xn, tn
        if moved <= 1e-13 * (1.0 + np.linalg.norm(x)):
            break
    return best_x, best


def solve_feasibility(p, tol=1e-8, x0=None, max_iter=2000):
    """Decide whether ``{phi_alpha <= 0} ∩ constraints`` is nonempty.

    Returns ``(feasible, witness)``. The witness is the best point found; it
    satisfies ``phi_alpha <= tol`` and the constraints to ``tol`` when
    ``feasible`` is true.
    """
    n = p.operator.in_dim
    x0 = np.zeros(n) if x0 is None else np.asarray(x0, dtype=np.float64).ravel()
    alpha = p.alpha
    if alpha > 1.0:
        # phi_alpha <= phi_1 everywhere, so a phi_1 witness certifies feasibility
        x, v = _minimize_phi(p, 1.0, x0, tol, max_iter, True)
        if v <= tol and p.violation(x) <= tol:
            return True, x
        x0 = x
    x, v = _minimize_phi(p, alpha, x0, tol, max_iter, True)
    v = phi_alpha(x, p.operator, p.y, alpha)
    return bool(v <= tol and p.violation(x) <= tol), x


# --------------------------------------------------------------------------
# bisection
# --------------------------------------------------------------------------


@dataclass
class BisectionResult:
    solution: np.ndarray
    bracket: Tuple[float, float]
    iterations: int
    feasibility_trace: List[Tuple[float, bool]] = field(default_factory=list)
    status: str = "ok"
    value: Optional[float] = None
    data_mean: float = 0.0

    def trace_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "alpha", "feasible"])
        for k, (a, ok) in enumerate(self.feasibility_trace, 1):
            w.writerow([k, repr(a), int(ok)])
        return buf.getvalue()

    def write_trace(self, path):
        atomic_write_bytes(path, self.trace_csv().encode())


def bisection_solve(operator, y, constraints=(), equality=None, eps=1e-3, tol=1e-8,
                    max_inner=2000, center=True, warm_start=True):
    """Minimize ``T(Phi x, y)`` over convex constraints by bisection on the level.

    ``y`` is mean-subtracted first when ``center`` is set (the mean is kept in
    ``data_mean``). The search starts from the bracket ``[0, 2]`` and halves it
    until its width is at most ``eps``. If the level ``alpha = 1`` is
    infeasible the run stops with status ``"infeasible_at_one"``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if isinstance(operator, np.ndarray):
        operator = MatrixMap(operator)
    y = np.asarray(y, dtype=np.float64).ravel()
    mean = 0.0
    if center:
        mean = float(y.mean())
        y = y - mean
    if not np.any(y):
        raise ValueError("data is constant; T is undefined with C = 0")
    lo, hi = 0.0, 2.0
    x = np.zeros(operator.in_dim)
    guess = x
    trace = []
    status = "ok"
    k = 0
    while hi - lo > eps:
        alpha = 0.5 * (lo + hi)
        fp = FeasibilityProblem(alpha, operator, y, constraints, equality)
        try:
            ok, w = solve_feasibility(fp, tol=tol, x0=guess if warm_start else None,
                                      max_iter=max_inner)
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise SolverError(f"feasibility solve failed at alpha={alpha}: {exc}") from exc
        k += 1
        trace.append((alpha, ok))
        if ok:
            hi = alpha
            x = w
            guess = w
        elif alpha == 1.0:
            status = "infeasible_at_one"
            break
        else:
            lo = alpha
    value = dissim_T(operator.apply(x), y) if status == "ok" else None
    return BisectionResult(x, (lo, hi), k, trace, status, value, mean)
