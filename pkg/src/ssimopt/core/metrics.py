"""SSIM, the normalized dissimilarity T and their blockwise averages."""

from dataclasses import dataclass

import numpy as np

from .blocks import BlockScheme


@dataclass(frozen=True)
class SsimConstants:
    """Stability constants ``C1 = (k1 L)^2``, ``C2 = (k2 L)^2``, ``C3 = C2 / 2``."""

    c1: float
    c2: float
    c3: float
    dynamic_range: float = 1.0

    @classmethod
    def for_range(cls, dynamic_range=1.0, k1=0.01, k2=0.03):
        if dynamic_range <= 0:
            raise ValueError("dynamic range must be positive")
        c2 = (k2 * dynamic_range) ** 2
        return cls((k1 * dynamic_range) ** 2, c2, c2 / 2.0, float(dynamic_range))

    def aggregated_c(self, n):
        """Constant ``C = C2 n`` of the zero-mean form for ``n``-pixel blocks."""
        return self.c2 * n


DEFAULT_CONSTANTS = SsimConstants.for_range(1.0)


def center(v):
    """Subtract the mean. Returns ``(v - mean, mean)``."""
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        raise ValueError("cannot center an empty array")
    m = float(v.mean())
    return v - m, m


def ssim_full(x, y, k=DEFAULT_CONSTANTS):
    """Luminance times contrast-structure SSIM of two equally sized blocks.

    Uses population (1/n) statistics so that, for zero-mean blocks, the value
    coincides with :func:`ssim_simplified` at ``C = C2 n``.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ValueError(f"size mismatch: {x.size} vs {y.size}")
    if x.size < 2:
        raise ValueError("need at least two samples")
    mx, my = x.mean(), y.mean()
    dx, dy = x - mx, y - my
    vx = np.mean(dx * dx)
    vy = np.mean(dy * dy)
    cxy = np.mean(dx * dy)
    lum = (2 * mx * my + k.c1) / (mx * mx + my * my + k.c1)
    cs = (2 * cxy + k.c2) / (vx + vy + k.c2)
    return float(lum * cs)


def _check_denominator(den, c):
    if den == 0.0:
        raise ValueError("T(x, y) is undefined for x = y = 0 with C = 0")


def ssim_simplified(x, y, c=0.0):
    """``(2 x^T y + C) / (||x||^2 + ||y||^2 + C)`` for zero-mean vectors."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ValueError(f"size mismatch: {x.size} vs {y.size}")
    den = x @ x + y @ y + c
    _check_denominator(den, c)
    return float((2.0 * (x @ y) + c) / den)


def dissim_T(x, y, c=0.0):
    """Structural dissimilarity ``||x - y||^2 / (||x||^2 + ||y||^2 + C)``."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ValueError(f"size mismatch: {x.size} vs {y.size}")
    if c < 0:
        raise ValueError("stability constant must be non-negative")
    den = x @ x + y @ y + c
    _check_denominator(den, c)
    d = x - y
    return float((d @ d) / den)


def grad_T(phi, x, y, c=0.0):
    """Gradient of ``x -> T(Phi x, y)``."""
    a = phi.apply(x)
    y = np.asarray(y, dtype=np.float64).reshape(a.shape)
    r = np.vdot(a, a) + np.vdot(y, y) + c
    if r <= 0.0:
        raise ValueError("zero denominator in T")
    t = np.vdot(a - y, a - y) / r
    return phi.adjoint(2.0 * ((a - y) - t * a) / r)


def _check_pair(X, Y):
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.shape != Y.shape:
        raise ValueError(f"image size mismatch: {X.shape} vs {Y.shape}")
    if X.ndim != 2:
        raise ValueError("images must be 2-D")
    return X, Y


def block_ssim(X, Y, scheme=BlockScheme(), k=DEFAULT_CONSTANTS, c=None):
    """Per-block SSIM of mean-subtracted blocks, shaped as the block grid.

    Each block uses ``C = C2 n_block`` unless ``c`` overrides it (``c=0`` is
    allowed when no block of both images is flat).
    """
    X, Y = _check_pair(X, Y)
    n = scheme.block_counts(X.shape).astype(np.float64)
    Xc = X - scheme.expand(scheme.block_sums(X) / n, X.shape)
    Yc = Y - scheme.expand(scheme.block_sums(Y) / n, Y.shape)
    cc = k.c2 * n if c is None else np.full_like(n, float(c))
    num = 2.0 * scheme.block_sums(Xc * Yc) + cc
    den = scheme.block_sums(Xc * Xc) + scheme.block_sums(Yc * Yc) + cc
    if np.any(den == 0.0):
        raise ValueError("flat block pair with C = 0: SSIM undefined")
    return num / den


def mssim(X, Y, scheme=BlockScheme(), k=DEFAULT_CONSTANTS, c=None):
    """Mean of :func:`block_ssim` over all blocks."""
    return float(np.mean(block_ssim(X, Y, scheme, k, c)))


def ssim_map(X, Y, scheme=BlockScheme(), k=DEFAULT_CONSTANTS, c=None):
    """Per-block SSIM tiled to image resolution."""
    X, _ = _check_pair(X, Y)
    return scheme.expand(block_ssim(X, Y, scheme, k, c), X.shape)


def block_T(X, Y, scheme=BlockScheme(), c=0.0):
    """Per-block T on raw blocks (block means kept). A block where both
    images vanish counts as identical (T = 0)."""
    X, Y = _check_pair(X, Y)
    diff = scheme.block_sums((X - Y) ** 2)
    den = scheme.block_sums(X * X) + scheme.block_sums(Y * Y) + c
    out = np.zeros_like(den)
    nz = den > 0
    out[nz] = diff[nz] / den[nz]
    return out


def mt_fidelity(X, Y, scheme=BlockScheme(), c=0.0):
    """``MT(X, Y) = (1/N) sum_i T(X_i, Y_i)`` over raw blocks."""
    return float(np.mean(block_T(X, Y, scheme, c)))


def psnr(X, reference, peak=1.0):
    X, R = _check_pair(X, reference)
    mse = float(np.mean((X - R) ** 2))
    if mse == 0.0:
        return float("inf")
    return 10.0 * np.log10(peak * peak / mse)
