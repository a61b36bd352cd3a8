"""Hot numerical kernels, each in a numba and a numpy flavour.

Two loops dominate the runtime of every pipeline:

* ``newton_identity`` solves many small, independent problems

      min_x  T(x, y) + lam * ||x - a||^2,   T(x, y) = ||x-y||^2 / (||x||^2 + ||y||^2 + c)

  one per row (image block), by Newton's method on the stationarity map
  ``f(x) = [s(x) + lam r(x)] x - lam r(x) a - y``. With an identity operator
  the Jacobian is ``(s + lam r) I`` plus a rank-two term, so each step is an
  O(n) Woodbury solve instead of a dense factorisation.
* ``chambolle`` is the fixed-point iteration on the dual field of the
  isotropic TV proximal problem.

Both flavours implement the same arithmetic; results agree to rounding.
"""

import math

import numpy as np

from ._backend import HAVE_NUMBA, get_backend

if HAVE_NUMBA:
    from numba import njit
else:  # pragma: no cover
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


MAX_HALVINGS = 30

# --------------------------------------------------------------------------
# Batched Newton, identity operator
# --------------------------------------------------------------------------


@njit(cache=True)
def _row_residual(x, y, a, lam, c, yy, f):
    n = x.shape[0]
    xx = 0.0
    xy = 0.0
    for i in range(n):
        xx += x[i] * x[i]
        xy += x[i] * y[i]
    r = xx + yy + c
    s = (2.0 * xy + c) / r
    lr = lam * r
    fn = 0.0
    for i in range(n):
        fi = s * x[i] + lr * (x[i] - a[i]) - y[i]
        f[i] = fi
        fn += fi * fi
    return s, r, math.sqrt(fn)


@njit(cache=True)
def _row_direction(x, y, a, lam, s, r, f, d):
    n = x.shape[0]
    D = s + lam * r
    gs = np.empty(n)
    u2 = np.empty(n)
    k11 = 0.0
    k12 = 0.0
    k21 = 0.0
    k22 = 0.0
    b1 = 0.0
    b2 = 0.0
    for i in range(n):
        gs[i] = 2.0 * (y[i] - s * x[i]) / r
        u2[i] = 2.0 * lam * (x[i] - a[i])
        k11 += gs[i] * x[i]
        k12 += gs[i] * u2[i]
        k21 += x[i] * x[i]
        k22 += x[i] * u2[i]
        b1 += gs[i] * f[i]
        b2 += x[i] * f[i]
    k11 += D
    k22 += D
    det = k11 * k22 - k12 * k21
    scale = abs(k11 * k22) + abs(k12 * k21)
    if abs(D) > 1e-13 * (abs(s) + lam * r + 1e-300) and abs(det) > 1e-13 * scale:
        w1 = (k22 * b1 - k12 * b2) / det
        w2 = (k11 * b2 - k21 * b1) / det
        for i in range(n):
            d[i] = -(f[i] - (x[i] * w1 + u2[i] * w2)) / D
        return True
    # Woodbury breaks down: fall back to a dense least-squares step
    J = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            J[i, j] = x[i] * gs[j] + u2[i] * x[j]
        J[i, i] += D
    sol = np.linalg.lstsq(J, -f)[0]
    for i in range(n):
        d[i] = sol[i]
    return False


@njit(cache=True)
def _newton_identity_nb(Y, A, lam, X0, c, tol, max_iter):
    N, n = Y.shape
    X = X0.copy()
    iters = np.zeros(N, dtype=np.int64)
    conv = np.zeros(N, dtype=np.bool_)
    f = np.empty(n)
    ft = np.empty(n)
    d = np.empty(n)
    xt = np.empty(n)
    for b in range(N):
        y = Y[b]
        a = A[b]
        x = X[b]
        lb = lam[b]
        yy = 0.0
        aa = 0.0
        for i in range(n):
            yy += y[i] * y[i]
            aa += a[i] * a[i]
        if yy == 0.0 and c == 0.0:
            # T(., 0) is constant where defined; the penalty alone decides
            for i in range(n):
                x[i] = a[i]
            conv[b] = True
            continue
        ny = math.sqrt(yy)
        na = math.sqrt(aa)
        s, r, fn = _row_residual(x, y, a, lb, c, yy, f)
        k = 0
        while True:
            if fn <= tol * (ny + lb * r * na) + 1e-300:
                conv[b] = True
                break
            if k >= max_iter:
                break
            _row_direction(x, y, a, lb, s, r, f, d)
            t = 1.0
            accepted = False
            for _ in range(MAX_HALVINGS + 1):
                for i in range(n):
                    xt[i] = x[i] + t * d[i]
                st, rt, fnt = _row_residual(xt, y, a, lb, c, yy, ft)
                if fnt < fn:
                    accepted = True
                    break
                t *= 0.5
            k += 1
            if not accepted:
                break
            for i in range(n):
                x[i] = xt[i]
                f[i] = ft[i]
            s, r, fn = st, rt, fnt
        iters[b] = k
    return X, iters, conv


def _residual_np(X, Y, A, lam, c, yy):
    r = np.einsum("ij,ij->i", X, X) + yy + c
    s = (2.0 * np.einsum("ij,ij->i", X, Y) + c) / r
    F = (s + lam * r)[:, None] * X - (lam * r)[:, None] * A - Y
    return s, r, F, np.sqrt(np.einsum("ij,ij->i", F, F))


def _direction_np(X, Y, A, lam, s, r, F):
    D = s + lam * r
    gs = 2.0 * (Y - s[:, None] * X) / r[:, None]
    u2 = 2.0 * lam[:, None] * (X - A)
    k11 = np.einsum("ij,ij->i", gs, X) + D
    k12 = np.einsum("ij,ij->i", gs, u2)
    k21 = np.einsum("ij,ij->i", X, X)
    k22 = np.einsum("ij,ij->i", X, u2) + D
    b1 = np.einsum("ij,ij->i", gs, F)
    b2 = np.einsum("ij,ij->i", X, F)
    det = k11 * k22 - k12 * k21
    scale = np.abs(k11 * k22) + np.abs(k12 * k21)
    good = (np.abs(D) > 1e-13 * (np.abs(s) + lam * r + 1e-300)) & (np.abs(det) > 1e-13 * scale)
    with np.errstate(divide="ignore", invalid="ignore"):
        w1 = (k22 * b1 - k12 * b2) / det
        w2 = (k11 * b2 - k21 * b1) / det
        Dd = -(F - (X * w1[:, None] + u2 * w2[:, None])) / D[:, None]
    for b in np.flatnonzero(~good):
        J = np.outer(X[b], gs[b]) + np.outer(u2[b], X[b]) + D[b] * np.eye(X.shape[1])
        Dd[b] = np.linalg.lstsq(J, -F[b], rcond=None)[0]
    return Dd


def _newton_identity_np(Y, A, lam, X0, c, tol, max_iter):
    N, n = Y.shape
    X = X0.copy()
    iters = np.zeros(N, dtype=np.int64)
    conv = np.zeros(N, dtype=bool)
    yy = np.einsum("ij,ij->i", Y, Y)
    na = np.sqrt(np.einsum("ij,ij->i", A, A))
    degenerate = (yy == 0.0) & (c == 0.0)
    X[degenerate] = A[degenerate]
    conv[degenerate] = True
    active = np.flatnonzero(~degenerate)
    if active.size:
        idx = active
        s, r, F, fn = _residual_np(X[idx], Y[idx], A[idx], lam[idx], c, yy[idx])
    k = 0
    while active.size:
        done = fn <= tol * (np.sqrt(yy[active]) + lam[active] * r * na[active]) + 1e-300
        conv[active[done]] = True
        iters[active] = k
        keep = ~done
        if k >= max_iter:
            break
        active, s, r, F, fn = active[keep], s[keep], r[keep], F[keep], fn[keep]
        if not active.size:
            break
        Xa, Ya, Aa, la = X[active], Y[active], A[active], lam[active]
        Dd = _direction_np(Xa, Ya, Aa, la, s, r, F)
        t = np.ones(active.size)
        searching = np.ones(active.size, dtype=bool)
        Xn, sn, rn, Fn, fnn = Xa.copy(), s.copy(), r.copy(), F.copy(), fn.copy()
        for _ in range(MAX_HALVINGS + 1):
            sel = np.flatnonzero(searching)
            if not sel.size:
                break
            Xt = Xa[sel] + t[sel, None] * Dd[sel]
            st, rt, Ft, fnt = _residual_np(Xt, Ya[sel], Aa[sel], la[sel], c, yy[active[sel]])
            ok = fnt < fn[sel]
            acc = sel[ok]
            Xn[acc], sn[acc], rn[acc], Fn[acc], fnn[acc] = Xt[ok], st[ok], rt[ok], Ft[ok], fnt[ok]
            searching[acc] = False
            t[sel[~ok]] *= 0.5
        k += 1
        stalled = searching
        iters[active] = k
        X[active] = Xn
        keep = ~stalled
        active, s, r, F, fn = active[keep], sn[keep], rn[keep], Fn[keep], fnn[keep]
    return X, iters, conv


def newton_identity(Y, A, lam, X0=None, c=0.0, tol=1e-10, max_iter=50):
    """Row-wise Newton solve of ``min_x T(x, y) + lam ||x - a||^2``.

    Parameters
    ----------
    Y, A : (N, n) arrays
        Data rows and anchor rows.
    lam : float or (N,) array
        Quadratic weights, one per row.
    X0 : (N, n) array, optional
        Starting points; the anchors by default.
    c : float
        Stability constant of T.
    tol : float
        Stop a row once ``||f|| <= tol * (||y|| + lam r ||a||)``.

    Returns
    -------
    X : (N, n) array
    iters : (N,) int array
    converged : (N,) bool array
    """
    Y = np.ascontiguousarray(Y, dtype=np.float64)
    A = np.ascontiguousarray(A, dtype=np.float64)
    if Y.ndim != 2 or Y.shape != A.shape:
        raise ValueError(f"Y and A must be matching 2-D arrays, got {Y.shape} and {A.shape}")
    lam = np.ascontiguousarray(np.broadcast_to(np.asarray(lam, dtype=np.float64), (Y.shape[0],)))
    X0 = A.copy() if X0 is None else np.ascontiguousarray(X0, dtype=np.float64)
    if get_backend() == "numba":
        return _newton_identity_nb(Y, A, lam, X0, float(c), float(tol), int(max_iter))
    return _newton_identity_np(Y, A, lam, X0, float(c), float(tol), int(max_iter))


# --------------------------------------------------------------------------
# Chambolle's dual iteration for the TV proximal map
# --------------------------------------------------------------------------


@njit(cache=True)
def _chambolle_nb(V, t, tau, tol, max_iter, px, py):
    H, W = V.shape
    w = np.empty((H, W))
    change = 0.0
    it = 0
    while it < max_iter:
        for i in range(H):
            for j in range(W):
                d = 0.0
                if j < W - 1:
                    d += px[i, j]
                if j > 0:
                    d -= px[i, j - 1]
                if i < H - 1:
                    d += py[i, j]
                if i > 0:
                    d -= py[i - 1, j]
                w[i, j] = d - V[i, j] / t
        num = 0.0
        den = 0.0
        for i in range(H):
            for j in range(W):
                gx = w[i, j + 1] - w[i, j] if j < W - 1 else 0.0
                gy = w[i + 1, j] - w[i, j] if i < H - 1 else 0.0
                scale = 1.0 + tau * math.sqrt(gx * gx + gy * gy)
                nx = (px[i, j] + tau * gx) / scale
                ny = (py[i, j] + tau * gy) / scale
                num += (nx - px[i, j]) ** 2 + (ny - py[i, j]) ** 2
                den += nx * nx + ny * ny
                px[i, j] = nx
                py[i, j] = ny
        it += 1
        change = math.sqrt(num) / max(math.sqrt(den), 1e-300)
        if change <= tol:
            break
    U = np.empty((H, W))
    for i in range(H):
        for j in range(W):
            d = 0.0
            if j < W - 1:
                d += px[i, j]
            if j > 0:
                d -= px[i, j - 1]
            if i < H - 1:
                d += py[i, j]
            if i > 0:
                d -= py[i - 1, j]
            U[i, j] = V[i, j] - t * d
    return U, px, py, it, change


def forward_grad(X):
    """Forward differences with a zero last column/row (Neumann boundary)."""
    gx = np.zeros_like(X)
    gy = np.zeros_like(X)
    gx[:, :-1] = X[:, 1:] - X[:, :-1]
    gy[:-1, :] = X[1:, :] - X[:-1, :]
    return gx, gy


def divergence(px, py):
    """Negative adjoint of :func:`forward_grad`."""
    d = np.zeros_like(px)
    d[:, :-1] += px[:, :-1]
    d[:, 1:] -= px[:, :-1]
    d[:-1, :] += py[:-1, :]
    d[1:, :] -= py[:-1, :]
    return d


def _chambolle_np(V, t, tau, tol, max_iter, px, py):
    change = 0.0
    it = 0
    while it < max_iter:
        gx, gy = forward_grad(divergence(px, py) - V / t)
        scale = 1.0 + tau * np.sqrt(gx * gx + gy * gy)
        nx = (px + tau * gx) / scale
        ny = (py + tau * gy) / scale
        num = np.sqrt(np.sum((nx - px) ** 2) + np.sum((ny - py) ** 2))
        den = np.sqrt(np.sum(nx * nx) + np.sum(ny * ny))
        px, py = nx, ny
        it += 1
        change = num / max(den, 1e-300)
        if change <= tol:
            break
    return V - t * divergence(px, py), px, py, it, change


def chambolle(V, t, tau=0.248, tol=1e-5, max_iter=500, p0=None):
    """Dual fixed-point iteration for ``argmin_U t TV(U) + 0.5 ||U - V||^2``.

    Returns ``(U, (px, py), iterations, last_relative_change)``. ``p0`` warm
    starts the dual field.
    """
    V = np.ascontiguousarray(V, dtype=np.float64)
    if p0 is None:
        px = np.zeros_like(V)
        py = np.zeros_like(V)
    else:
        px = np.array(p0[0], dtype=np.float64, order="C")
        py = np.array(p0[1], dtype=np.float64, order="C")
    if get_backend() == "numba":
        U, px, py, it, change = _chambolle_nb(V, float(t), float(tau), float(tol), int(max_iter), px, py)
    else:
        U, px, py, it, change = _chambolle_np(V, float(t), float(tau), float(tol), int(max_iter), px, py)
    return U, (px, py), int(it), float(change)
