"""Imaging pipelines pairing an SSIM-based method with its squared-error
counterpart: block-DCT sparse approximation, Tikhonov recovery, TV denoising,
zooming and deblurring, plus regularization matching and sweeps."""

import csv
import io
import math
import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .admm import SplitProblem, admm3_l1_rows, admm3_solve, admm4_solve
from .core.blocks import BlockScheme
from .core.metrics import mssim, psnr
from .core.operators import block_dct, blur_subsample, gaussian_blur, identity
from .prox import prox_tv_chambolle, soft_threshold, tv_seminorm
from .report import SolveReport, SolverError

TASKS = ("sparse_approx", "tikhonov", "denoise", "zoom", "deblur")
METHODS = ("ssim", "l2")
DEFAULT_PSNR = 18.067
# penalties for the SSIM method, in units of 1 / ||Y||_F^2; zooming averages
# 4x4 pixels so the curvature seen by X is ~16x smaller there
SSIM_PENALTY = {"denoise": 30.0, "zoom": 1.0, "deblur": 30.0}
# Chambolle sweeps per ADMM z-update (warm started, so a few suffice)
INNER_TV_ITERS = 20
# TV matching needs TV(lam) reproducible to well under its 0.5% window
TV_EPS_REL = 1e-6
TV_EPS_ABS = 1e-8


class MatchError(SolverError):
    """Regularization matching could not reach its target."""


@dataclass(frozen=True)
class RegMatchTarget:
    kind: str
    value: float

    def __post_init__(self):
        if self.kind == "l0_per_block":
            if self.value < 0 or int(self.value) != self.value:
                raise ValueError("l0 target must be a non-negative integer")
        elif self.kind == "tv_total":
            if not self.value > 0:
                raise ValueError("TV target must be positive")
        else:
            raise ValueError(f"unknown target kind {self.kind!r}")

    @classmethod
    def l0(cls, count):
        return cls("l0_per_block", int(count))

    @classmethod
    def tv(cls, total):
        return cls("tv_total", float(total))


@dataclass
class ExperimentSpec:
    task: str
    method: str = "ssim"
    lam: Optional[float] = None
    target: Optional[RegMatchTarget] = None
    scheme: BlockScheme = field(default_factory=BlockScheme)
    sigma: Optional[float] = None
    factor: Optional[int] = None
    seed: int = 0
    rho: Optional[float] = None
    mu: Optional[float] = None
    max_iter: int = 500
    noise_psnr: float = DEFAULT_PSNR
    eps: Optional[float] = None  # ADMM relative tolerance; None keeps the task default

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.task == "zoom" and (self.factor is None or self.factor < 2):
            raise ValueError("zoom needs factor >= 2")
        if self.task == "deblur" and not (self.sigma and self.sigma > 0):
            raise ValueError("deblur needs sigma > 0")
        if self.lam is not None and self.lam <= 0:
            raise ValueError("lam must be positive")
        if self.eps is not None and not self.eps > 0:
            raise ValueError("eps must be positive")
        if (self.rho is not None and self.rho <= 0) or (self.mu is not None and self.mu <= 0):
            raise ValueError("rho and mu must be positive")

    def _default_penalty(self):
        # the SSIM penalties are relative to the data energy (see _tv_run)
        return SSIM_PENALTY.get(self.task, 1.0) if self.method == "ssim" else 1.0

    @property
    def rho_value(self):
        """``rho``, or the task/method default when unset."""
        return self._default_penalty() if self.rho is None else float(self.rho)

    @property
    def mu_value(self):
        return self._default_penalty() if self.mu is None else float(self.mu)

    def eps_rel(self, default):
        return default if self.eps is None else float(self.eps)


def _finish(rep, recon, reference, scheme, t0, **extra):
    rep.x = recon
    if reference is not None:
        rep.mssim = mssim(recon, reference, scheme)
    if recon.ndim == 2:
        rep.tv = tv_seminorm(recon)
    rep.runtime = time.perf_counter() - t0
    rep.info.update(extra)
    return rep


# --------------------------------------------------------------------------
# noise
# --------------------------------------------------------------------------


def add_awgn(X, target_psnr=DEFAULT_PSNR, seed=0, peak=1.0):
    """Add white Gaussian noise scaled so that the result has exactly the
    requested PSNR against ``X``."""
    X = np.asarray(X, dtype=np.float64)
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(X.shape)
    sigma = peak * 10.0 ** (-target_psnr / 20.0)
    noise *= sigma / math.sqrt(np.mean(noise * noise))
    return X + noise


# --------------------------------------------------------------------------
# sparse approximation in the block DCT
# --------------------------------------------------------------------------


def _block_coefficients(Y, scheme):
    D = block_dct(Y.shape, (scheme.block_rows, scheme.block_cols))
    means = scheme.expand(scheme.block_means(Y), Y.shape)
    C = scheme.pack(D.adjoint(Y - means))
    C[:, 0] = 0.0  # DC of a mean-free block; drop its round-off
    return D, means, C


def snap_ties(C, rtol=1e-10):
    """Make entry magnitudes within ``rtol`` of each other (per row) exactly
    equal, so that rounding noise cannot split a mathematical tie."""
    C = np.array(C, dtype=np.float64)
    for row in C:
        order = np.argsort(-np.abs(row), kind="stable")
        mags = np.abs(row[order])
        for i in range(1, mags.size):
            if mags[i] > 0 and mags[i - 1] - mags[i] <= rtol * mags[i - 1]:
                mags[i] = mags[i - 1]
        row[order] = np.sign(row[order]) * mags
    return C


def _l0_rows(Z, tol=0.0):
    return np.count_nonzero(np.abs(Z) > tol, axis=1)


def _bisect_rows(measure, lo, hi, target, max_steps=60, rtol=1e-2):
    """Per-row geometric bisection on a decreasing integer response.

    ``measure(lam, rows)`` returns the response and solution for the given
    rows. Keeps ``resp(lo) > target >= resp(hi)`` and stops a row when
    ``resp(hi) == target`` and ``hi / lo <= 1 + rtol``. Returns ``(hi, sol_hi,
    resp_hi, sol_lo)``; the solutions are the ones computed at ``hi`` and ``lo``.
    """
    N = lo.size
    all_rows = np.arange(N)
    resp_hi, sol_hi = measure(hi, all_rows)
    resp_lo, sol_lo = measure(lo, all_rows)
    if np.any(resp_hi > target):
        bad = np.flatnonzero(resp_hi > target)
        raise MatchError(f"upper bracket too weak for blocks {bad[:5].tolist()}")
    # target already met (or not reachable) at the weakest weight
    at_lo = resp_lo <= target
    hi[at_lo] = lo[at_lo]
    resp_hi[at_lo] = resp_lo[at_lo]
    sol_hi[at_lo] = sol_lo[at_lo]
    active = np.flatnonzero((resp_lo > target) & ~((resp_hi == target) & (hi <= lo * (1 + rtol))))
    for _ in range(max_steps):
        if not active.size:
            break
        mid = np.sqrt(lo[active] * hi[active])
        resp, sol = measure(mid, active)
        up = resp > target
        lo[active[up]] = mid[up]
        sol_lo[active[up]] = sol[up]
        down = active[~up]
        hi[down] = mid[~up]
        resp_hi[down] = resp[~up]
        sol_hi[down] = sol[~up]
        done = (resp_hi[active] == target) & (hi[active] <= lo[active] * (1.0 + rtol))
        active = active[~done]
    return hi, sol_hi, resp_hi, sol_lo


def _drop_surplus(Z, k):
    """Keep the ``k`` largest magnitudes of ``Z``; among equal magnitudes the
    lower index wins."""
    Z = Z.copy()
    order = np.lexsort((np.arange(Z.size), -np.abs(Z)))
    Z[order[k:]] = 0.0
    return Z


def match_l0_rows(C, target, method="ssim", rho=1.0, max_steps=60, rtol=1e-2, ties="raise"):
    """Per-row regularization giving exactly ``target`` nonzero coefficients.

    ``target`` is capped per row by the number of nonzero entries of the row.
    Among the weights achieving the target, the result lies within ``rtol``
    (relative) of the smallest one, i.e. the least shrinkage that still
    reaches the requested sparsity. Returns ``(lam, solutions, l0)``.

    Coefficients of equal magnitude enter together, so some counts cannot be
    hit exactly. ``ties`` selects what happens then: ``"raise"`` raises
    :class:`MatchError`, ``"below"`` keeps the largest count under the target
    and ``"drop"`` takes the solution just below the tie and zeroes its
    surplus entries, smallest first and higher index first among equals.
    Those entries are within the bisection tolerance of zero.
    """
    if ties not in ("raise", "below", "drop"):
        raise ValueError(f"unknown tie rule {ties!r}")
    C = snap_ties(C)
    N = C.shape[0]
    nnz = _l0_rows(C)
    tgt = np.minimum(int(target), nnz)
    energy = np.einsum("ij,ij->i", C, C)
    cmax = np.abs(C).max(axis=1)
    safe_e = np.where(energy > 0, energy, 1.0)
    if method == "l2":
        hi = np.where(cmax > 0, 2.0 * cmax, 1.0)
        lo = np.where(cmax > 0, 1e-9 * cmax, 0.5)

        def measure(lam, rows):
            Z = soft_threshold(C[rows], lam[:, None])
            return _l0_rows(Z), Z
    else:
        # x = 0 is optimal once lam >= 2 ||c||_inf / ||c||^2
        hi = np.where(energy > 0, 4.0 * cmax / safe_e, 1.0)
        lo = 1e-9 * hi
        state = admm3_l1_rows(C, hi, rho)

        def measure(lam, rows):
            sub = type(state)(state.X[rows], state.Z[rows], state.U[rows])
            out = admm3_l1_rows(C[rows], lam, rho, state=sub)
            state.X[rows], state.Z[rows], state.U[rows] = out.X, out.Z, out.U
            return _l0_rows(out.Z), out.Z

    lam = np.empty(N)
    sol = np.zeros_like(C)
    l0 = np.zeros(N, dtype=np.int64)
    for t in np.unique(tgt):
        rows = np.flatnonzero(tgt == t)

        def sub_measure(lmb, idx, rows=rows):
            return measure(lmb, rows[idx])

        h, s, r, s_lo = _bisect_rows(sub_measure, lo[rows].copy(), hi[rows].copy(), int(t),
                                     max_steps, rtol)
        if ties == "drop":
            for j in np.flatnonzero((r < t) & (_l0_rows(s_lo) > t)):
                s[j] = _drop_surplus(s_lo[j], int(t))
                r[j] = t
        lam[rows], sol[rows], l0[rows] = h, s, r
    miss = np.flatnonzero(l0 != tgt)
    if miss.size and ties == "raise":
        raise MatchError(f"l0 target unreachable for {miss.size} block(s), e.g. {miss[:5].tolist()}")
    return lam, sol, l0


def sparse_approx(Y, spec, reference=None):
    """Block-DCT sparse approximation of ``Y``.

    The SSIM method solves ``min_x T(D x, y) + lam ||x||_1`` per mean-subtracted
    block with the two-block ADMM; the baseline soft-thresholds the block DCT
    coefficients. With an ``l0_per_block`` target each block gets its own
    weight. The block means are restored in the output.
    """
    t0 = time.perf_counter()
    Y = np.asarray(Y, dtype=np.float64)
    scheme = spec.scheme
    D, means, C = _block_coefficients(Y, scheme)
    unmatched = 0
    if spec.target is not None:
        if spec.target.kind != "l0_per_block":
            raise ValueError("sparse_approx matches l0 targets only")
        lam, Z, l0 = match_l0_rows(C, spec.target.value, spec.method, spec.rho_value,
                                   ties="drop")
        unmatched = int(np.count_nonzero(l0 < np.minimum(spec.target.value, _l0_rows(C))))
        converged = True
        iters = 0
    else:
        lam = np.full(C.shape[0], float(spec.lam if spec.lam is not None else 0.1))
        if spec.method == "l2":
            Z = soft_threshold(C, lam[:, None])
            converged, iters = True, 1
        else:
            st = admm3_l1_rows(C, lam, spec.rho_value, max_iter=spec.max_iter,
                               eps_rel=spec.eps_rel(1e-4))
            Z = st.Z
            converged, iters = bool(np.all(st.converged)), int(st.iterations.max(initial=0))
    coef = scheme.unpack(Z, Y.shape)
    recon = D.apply(coef) + means
    l0 = _l0_rows(Z).reshape(scheme.grid(Y.shape))
    rep = SolveReport(x=recon, converged=converged, iterations=iters, l0=l0,
                      status="ok" if converged else "max_iter")
    return _finish(rep, recon, Y if reference is None else reference, scheme, t0,
                   lam=lam.reshape(scheme.grid(Y.shape)), coefficients=coef,
                   unmatched_blocks=unmatched)


# --------------------------------------------------------------------------
# Tikhonov
# --------------------------------------------------------------------------


def tikhonov_recover(Y, a_map=None, spec=None, phi=None, reference=None):
    """``min_x T(Phi x, y) + lam ||A x||^2`` by two-block ADMM (mean-subtracted
    data; the mean is added back when ``Phi`` is the identity). The ``l2``
    method solves ``||Phi x - y||^2 + lam ||A x||^2`` directly."""
    t0 = time.perf_counter()
    spec = spec or ExperimentSpec("tikhonov", lam=1e-2)
    Y = np.asarray(Y, dtype=np.float64)
    phi = phi or identity(Y.shape)
    a_map = a_map or identity(phi.in_shape)
    lam = float(spec.lam if spec.lam is not None else 1e-2)
    is_id = phi.in_shape == phi.out_shape and phi.kind == "identity"
    if spec.method == "l2":
        mean = float(Y.mean())
        yc = Y - mean
        from .prox import prox_tikhonov

        # (Phi^T Phi + lam A^T A) x = Phi^T y, identity Phi reduces to the prox
        if is_id:
            x = prox_tikhonov(yc, a_map, lam)
        else:
            import scipy.sparse.linalg as spla

            n = phi.in_dim
            op = spla.LinearOperator(
                (n, n), dtype=np.float64,
                matvec=lambda v: (phi.gram(v.reshape(phi.in_shape))
                                  + lam * a_map.gram(v.reshape(phi.in_shape))).ravel())
            x, _ = spla.cg(op, phi.adjoint(yc).ravel(), rtol=1e-10, atol=0.0, maxiter=10 * n)
            x = x.reshape(phi.in_shape)
        rep = SolveReport(x=x, converged=True, iterations=1, data_mean=mean)
    else:
        p = SplitProblem(phi, Y, "tikhonov", lam, rho=spec.rho_value, reg_map=a_map)
        rep = admm3_solve(p, max_iter=spec.max_iter, eps_rel=spec.eps_rel(1e-4))
    recon = rep.x + rep.data_mean if is_id else rep.x
    ref = reference if reference is not None and np.ndim(recon) == 2 else None
    return _finish(rep, recon, ref, spec.scheme, t0)


# --------------------------------------------------------------------------
# TV tasks
# --------------------------------------------------------------------------


def _energy_scale(Y):
    e = float(np.sum(np.asarray(Y) ** 2))
    return 1.0 / e if e > 0 else 1.0


def _tv_run(task, Y, spec, lam, reference=None, warm=None):
    """One TV-regularized solve at weight ``lam``; ``warm`` is a previous
    report of the same task and method."""
    t0 = time.perf_counter()
    scheme = spec.scheme
    if task == "denoise" and spec.method == "l2":
        # min ||X - Y||^2 + lam TV(X)  ==  prox of (lam / 2) TV at Y
        dual = warm.info.get("warm") if warm is not None else None
        X, info = prox_tv_chambolle(Y, lam / 2.0, tol=1e-6, max_iter=5000, warm=dual,
                                    return_info=True)
        rep = SolveReport(x=X, converged=info["converged"], iterations=info["iterations"],
                          status="ok" if info["converged"] else "max_iter",
                          info={"warm": info["dual"]})
        return _finish(rep, X, reference, scheme, t0, lam=lam)
    if task == "denoise":
        op = identity(Y.shape)
    elif task == "zoom":
        f = int(spec.factor)
        op = blur_subsample((Y.shape[0] * f, Y.shape[1] * f), f)
    else:
        op = gaussian_blur(Y.shape, spec.sigma)
    if spec.method == "ssim":
        scale = _energy_scale(Y)
        p = SplitProblem(op, Y, "tv", lam, rho=spec.rho_value * scale,
                         mu=spec.mu_value * scale,
                         scheme=scheme, fidelity="ssim")
    else:
        p = SplitProblem(op, Y, "tv", lam, rho=spec.rho_value, mu=spec.mu_value, fidelity="l2")
    if task == "denoise":
        kw = {}
        if warm is not None:
            ratio = lam / warm.info["lam"]
            kw = dict(x0=warm.info["x"], z0=warm.x, u0=warm.info["u"] * ratio,
                      warm=warm.info.get("warm"))
        rep = admm3_solve(p, max_iter=spec.max_iter, center=False, prox_tol=1e-6,
                          eps_abs=TV_EPS_ABS, eps_rel=spec.eps_rel(TV_EPS_REL),
                          prox_max_iter=INNER_TV_ITERS, **kw)
    else:
        state = None
        if warm is not None:
            ratio = lam / warm.info["lam"]
            state = dict(warm.info)
            state["z"] = warm.info["z"]
            state["u"] = warm.info["u"] * ratio
            state["v"] = warm.info["v"] * ratio
        rep = admm4_solve(p, max_iter=spec.max_iter, center=False, state=state, prox_tol=1e-6,
                          eps_abs=TV_EPS_ABS, eps_rel=spec.eps_rel(TV_EPS_REL),
                          prox_max_iter=INNER_TV_ITERS)
    return _finish(rep, rep.x, reference, scheme, t0, lam=lam)


def match_tv(task, Y, spec, target_tv, lam0=None, reference=None, max_steps=40, rtol=0.005):
    """Find ``lam`` whose reconstruction has TV within ``rtol`` of the target.

    TV decreases with ``lam``. The search brackets the target by factors of
    4, then narrows the bracket by interpolation in ``log TV`` versus
    ``log lam`` (falling back to geometric bisection when interpolation
    stalls). ADMM solves start cold: warm starts carry the previous stopping
    error along the path and make TV(lam) path dependent. Returns
    ``(lam, report)``.
    """
    if lam0 is None:
        lam0 = 1.0 if spec.method == "l2" else 1e-3
    chain = task == "denoise" and spec.method == "l2"
    lo = hi = None  # (lam, tv) with tv above / below the target
    rep = None
    lam = lam0
    side = 0
    for step in range(max_steps):
        rep = _tv_run(task, Y, spec, lam, reference, warm=rep if chain else None)
        tv = rep.tv
        if abs(tv - target_tv) <= rtol * target_tv:
            rep.info["match_steps"] = step + 1
            return lam, rep
        if tv > target_tv:
            lo = (lam, tv)
            side = side + 1 if side > 0 else 1
        else:
            hi = (lam, tv)
            side = side - 1 if side < 0 else -1
        if lo is None:
            lam = hi[0] / 4.0
        elif hi is None:
            lam = lo[0] * 4.0
        elif abs(side) >= 2 or lo[1] <= 0 or hi[1] <= 0:
            lam = math.sqrt(lo[0] * hi[0])
        else:
            a, b = math.log(lo[0]), math.log(hi[0])
            fa, fb = math.log(lo[1] / target_tv), math.log(hi[1] / target_tv)
            lam = math.exp(a - fa * (b - a) / (fb - fa))
    raise MatchError(f"TV target {target_tv} not reached (last TV {rep.tv:.4g} at lam={lam:.4g})")


def _tv_task(task, Y, spec, reference):
    Y = np.asarray(Y, dtype=np.float64)
    if spec.target is not None:
        if spec.target.kind != "tv_total":
            raise ValueError(f"{task} matches TV targets only")
        lam, rep = match_tv(task, Y, spec, spec.target.value, reference=reference)
        rep.info["lam"] = lam
        return rep
    lam = spec.lam if spec.lam is not None else (1e-3 if spec.method == "ssim" else 0.1)
    return _tv_run(task, Y, spec, lam, reference)


def denoise(Y_noisy, spec, reference=None):
    """TV denoising. SSIM method: ``min MT(X, Y) + lam TV(X)`` by two-block ADMM
    on raw blocks; baseline: ``min ||X - Y||^2 + lam TV(X)`` by Chambolle."""
    return _tv_task("denoise", Y_noisy, spec, reference)


def zoom(Y_low, spec, reference=None):
    """Upscaling by ``spec.factor`` through ``min F(S X, Y) + lam TV(X)`` with
    ``S`` blur then subsample, solved by three-block ADMM for both fidelities."""
    return _tv_task("zoom", Y_low, spec, reference)


def deblur(Y_blurred, spec, reference=None):
    """Gaussian deblurring through ``min F(B X, Y) + lam TV(X)`` by three-block ADMM."""
    return _tv_task("deblur", Y_blurred, spec, reference)


def degrade(X, spec):
    """Synthesize the observation of a clean image for ``spec.task``."""
    X = np.asarray(X, dtype=np.float64)
    if spec.task == "denoise":
        return add_awgn(X, spec.noise_psnr, spec.seed)
    if spec.task == "zoom":
        f = int(spec.factor)
        H, W = (X.shape[0] // f) * f, (X.shape[1] // f) * f
        return blur_subsample((H, W), f).apply(X[:H, :W])
    if spec.task == "deblur":
        return gaussian_blur(X.shape, spec.sigma).apply(X)
    return X.copy()


def run_task(X_clean, spec):
    """Degrade a clean image per ``spec`` and reconstruct it; MSSIM is
    measured against the clean image."""
    Y = degrade(X_clean, spec)
    if spec.task == "sparse_approx":
        return sparse_approx(Y, spec)
    if spec.task == "tikhonov":
        return tikhonov_recover(Y, spec=spec, reference=X_clean)
    ref = X_clean
    if spec.task == "zoom":
        f = int(spec.factor)
        ref = X_clean[:Y.shape[0] * f, :Y.shape[1] * f]
    return {"denoise": denoise, "zoom": zoom, "deblur": deblur}[spec.task](Y, spec, reference=ref)


def match_regularization(task, method, target, Y, spec=None, reference=None):
    """Regularization weight meeting ``target`` for ``task``/``method``.

    ``l0_per_block`` targets return one weight per block (sparse
    approximation); ``tv_total`` targets return a scalar.
    """
    spec = spec or ExperimentSpec(task, method, factor=4 if task == "zoom" else None,
                                  sigma=5.0 if task == "deblur" else None)
    spec = replace(spec, task=task, method=method, target=target)
    if target.kind == "l0_per_block":
        if task != "sparse_approx":
            raise ValueError("l0 targets apply to sparse_approx")
        _, _, C = _block_coefficients(np.asarray(Y, dtype=np.float64), spec.scheme)
        lam, _, _ = match_l0_rows(C, target.value, method, spec.rho_value, ties="drop")
        return lam.reshape(spec.scheme.grid(np.shape(Y)))
    lam, _ = match_tv(task, np.asarray(Y, dtype=np.float64), spec, target.value,
                      reference=reference)
    return lam


# --------------------------------------------------------------------------
# sweeps
# --------------------------------------------------------------------------


def sweep(task, targets, X_clean, spec=None):
    """MSSIM of both methods at each regularization target.

    ``targets`` are l0 counts for ``sparse_approx`` and TV totals otherwise.
    A failing point is recorded with NaNs and its error message. Returns a list
    of dicts with keys ``target``, ``mssim_ssim``, ``mssim_l2``, ``error``.
    """
    base = spec or ExperimentSpec(task, factor=4 if task == "zoom" else None,
                                  sigma=5.0 if task == "deblur" else None)
    rows = []
    for t in targets:
        tgt = RegMatchTarget.l0(t) if task == "sparse_approx" else RegMatchTarget.tv(t)
        row = {"target": t, "mssim_ssim": math.nan, "mssim_l2": math.nan, "error": ""}
        try:
            for method in METHODS:
                rep = run_task(X_clean, replace(base, task=task, method=method, target=tgt,
                                                lam=None))
                row[f"mssim_{method}"] = rep.mssim
        except (SolverError, ValueError) as exc:
            row["error"] = str(exc)
        rows.append(row)
    return rows


def sweep_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["target", "mssim_ssim", "mssim_l2", "error"])
    for r in rows:
        w.writerow([r["target"], repr(float(r["mssim_ssim"])), repr(float(r["mssim_l2"])),
                    r["error"]])
    return buf.getvalue()


__all__ = [
    "ExperimentSpec", "MatchError", "RegMatchTarget", "add_awgn", "deblur", "degrade", "denoise",
    "match_l0_rows", "match_regularization", "match_tv", "psnr", "run_task", "sparse_approx",
    "sweep", "sweep_csv", "tikhonov_recover", "zoom",
]
