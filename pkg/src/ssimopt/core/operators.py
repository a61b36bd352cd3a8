"""Linear operators acting on vectors or images.

Every map exposes ``apply`` (Phi x), ``adjoint`` (Phi^T y), ``gram``
(Phi^T Phi x) and ``solve_shifted`` for systems ``(rho Phi^T Phi + mu I) x = b``.
Image operators used by the pipelines (block DCT synthesis, Gaussian blur,
blur followed by subsampling) are separable, ``X -> R X C^T``, which makes the
shifted solve exact through two small eigendecompositions.
"""

import math

import numpy as np
import scipy.fft
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class LinearMap:
    """Base class. Subclasses implement ``_apply`` and ``_adjoint`` on arrays
    already shaped as ``in_shape`` / ``out_shape``."""

    kind = "abstract"

    def __init__(self, in_shape, out_shape):
        self.in_shape = tuple(int(s) for s in in_shape)
        self.out_shape = tuple(int(s) for s in out_shape)

    def __repr__(self):
        return f"{type(self).__name__}(kind={self.kind!r}, in={self.in_shape}, out={self.out_shape})"

    @property
    def in_dim(self):
        return math.prod(self.in_shape)

    @property
    def out_dim(self):
        return math.prod(self.out_shape)

    @staticmethod
    def _coerce(v, shape, what):
        v = np.asarray(v, dtype=np.float64)
        if v.shape == shape:
            return v
        if v.size != math.prod(shape):
            raise ValueError(f"{what}: expected shape {shape}, got {v.shape}")
        return v.reshape(shape)

    def apply(self, x):
        return self._apply(self._coerce(x, self.in_shape, "apply"))

    def adjoint(self, y):
        return self._adjoint(self._coerce(y, self.out_shape, "adjoint"))

    def gram(self, x):
        return self.adjoint(self.apply(x))

    def to_matrix(self):
        """Dense matrix acting on row-major flattened inputs."""
        M = np.empty((self.out_dim, self.in_dim))
        e = np.zeros(self.in_dim)
        for j in range(self.in_dim):
            e[j] = 1.0
            M[:, j] = self.apply(e).ravel()
            e[j] = 0.0
        return M

    def norm(self):
        """Spectral norm ||Phi||_2."""
        if self.in_dim <= 1024:
            return float(np.linalg.norm(self.to_matrix(), 2))
        rng = np.random.default_rng(0)
        x = rng.standard_normal(self.in_shape)
        lam = 0.0
        for _ in range(200):
            x /= np.linalg.norm(x)
            g = self.gram(x)
            new = float(np.vdot(x, g))
            x = g
            if abs(new - lam) <= 1e-12 * max(new, 1e-300):
                lam = new
                break
            lam = new
        return math.sqrt(max(lam, 0.0))

    def solve_shifted(self, rho, mu, b, tol=1e-12, max_iter=None):
        """Solve ``(rho Phi^T Phi + mu I) x = b`` by conjugate gradients."""
        b = self._coerce(b, self.in_shape, "solve_shifted")
        n = self.in_dim

        def mv(v):
            v = v.reshape(self.in_shape)
            return (rho * self.gram(v) + mu * v).ravel()

        op = spla.LinearOperator((n, n), matvec=mv, dtype=np.float64)
        x, info = spla.cg(op, b.ravel(), rtol=tol, atol=0.0, maxiter=max_iter or 10 * n)
        if info != 0:
            res = np.linalg.norm(mv(x) - b.ravel()) / max(np.linalg.norm(b), 1e-300)
            raise RuntimeError(f"CG did not converge (relative residual {res:.3e})")
        return x.reshape(self.in_shape)

    def initial_guess(self, y):
        """A cheap point in the input space consistent with data ``y``."""
        y = self._coerce(y, self.out_shape, "initial_guess")
        if self.in_shape == self.out_shape:
            return y.copy()
        return self.adjoint(y)


class IdentityMap(LinearMap):
    kind = "identity"

    def __init__(self, shape):
        super().__init__(shape, shape)

    def _apply(self, x):
        return x.copy()

    def _adjoint(self, y):
        return y.copy()

    def norm(self):
        return 1.0

    def solve_shifted(self, rho, mu, b, tol=None, max_iter=None):
        return self._coerce(b, self.in_shape, "solve_shifted") / (rho + mu)


class MatrixMap(LinearMap):
    """Explicit dense matrix on 1-D vectors."""

    kind = "matrix"

    def __init__(self, M, kind=None):
        M = np.asarray(M, dtype=np.float64)
        if M.ndim != 2:
            raise ValueError("matrix must be 2-D")
        super().__init__((M.shape[1],), (M.shape[0],))
        self.M = M
        if kind is not None:
            self.kind = kind
        self._gram = None

    def _apply(self, x):
        return self.M @ x

    def _adjoint(self, y):
        return self.M.T @ y

    def to_matrix(self):
        return self.M.copy()

    def gram_matrix(self):
        if self._gram is None:
            self._gram = self.M.T @ self.M
        return self._gram

    def solve_shifted(self, rho, mu, b, tol=None, max_iter=None):
        b = self._coerce(b, self.in_shape, "solve_shifted")
        return np.linalg.solve(rho * self.gram_matrix() + mu * np.eye(self.in_dim), b)


class SeparableMap(LinearMap):
    """``X -> R X C^T`` for an image ``X``; ``R``/``C`` dense or sparse."""

    def __init__(self, R, C, kind="separable", **params):
        self.R = R
        self.C = C
        super().__init__((R.shape[1], C.shape[1]), (R.shape[0], C.shape[0]))
        self.kind = kind
        self.params = params
        self._eig = None

    @staticmethod
    def _left(A, X):
        return np.asarray(A @ X)

    def _apply(self, x):
        return self._left(self.C, self._left(self.R, x).T).T

    def _adjoint(self, y):
        return self._left(self.C.T, self._left(self.R.T, y).T).T

    def _dense(self, A):
        return A.toarray() if sp.issparse(A) else np.asarray(A)

    def to_matrix(self):
        return np.kron(self._dense(self.R), self._dense(self.C))

    def norm(self):
        return float(np.linalg.norm(self._dense(self.R), 2) * np.linalg.norm(self._dense(self.C), 2))

    def _eigs(self):
        if self._eig is None:
            R = self._dense(self.R)
            C = self._dense(self.C)
            lr, Qr = np.linalg.eigh(R.T @ R)
            lc, Qc = np.linalg.eigh(C.T @ C)
            self._eig = (np.clip(lr, 0.0, None), Qr, np.clip(lc, 0.0, None), Qc)
        return self._eig

    def solve_shifted(self, rho, mu, b, tol=None, max_iter=None):
        b = self._coerce(b, self.in_shape, "solve_shifted")
        lr, Qr, lc, Qc = self._eigs()
        B = Qr.T @ b @ Qc
        return Qr @ (B / (rho * np.outer(lr, lc) + mu)) @ Qc.T

    def initial_guess(self, y):
        y = self._coerce(y, self.out_shape, "initial_guess")
        factor = self.params.get("factor")
        if factor:
            up = np.kron(y, np.ones((factor, factor)))
            return up[:self.in_shape[0], :self.in_shape[1]].copy()
        return super().initial_guess(y)


class ComposedMap(LinearMap):
    """``outer o inner``."""

    kind = "composed"

    def __init__(self, outer, inner):
        if inner.out_shape != outer.in_shape:
            raise ValueError(f"cannot compose {outer!r} after {inner!r}")
        super().__init__(inner.in_shape, outer.out_shape)
        self.outer = outer
        self.inner = inner

    def _apply(self, x):
        return self.outer.apply(self.inner.apply(x))

    def _adjoint(self, y):
        return self.inner.adjoint(self.outer.adjoint(y))


# --------------------------------------------------------------------------
# factories
# --------------------------------------------------------------------------


def identity(shape):
    if isinstance(shape, int):
        shape = (shape,)
    return IdentityMap(shape)


def dct_matrix(n):
    """Orthonormal DCT-II matrix ``D`` (``D @ x == dct(x, norm='ortho')``)."""
    return scipy.fft.dct(np.eye(n), norm="ortho", axis=0)


def _block_diag_dct(n, block):
    blocks = [dct_matrix(min(block, n - s)) for s in range(0, n, block)]
    return sp.block_diag(blocks, format="csr")


def block_dct(shape, block=8):
    """Blockwise orthonormal 2-D DCT *synthesis*: coefficients -> image.

    The adjoint is the blockwise forward DCT (analysis). Truncated edge blocks
    use a DCT of their own (smaller) size.
    """
    br, bc = (block, block) if np.isscalar(block) else block
    Dr = _block_diag_dct(shape[0], br)
    Dc = _block_diag_dct(shape[1], bc)
    # image block B = Dr_k^T coef Dc_k  ->  R = Dr^T, C = Dc^T
    return SeparableMap(Dr.T.tocsr(), Dc.T.tocsr(), kind="block_dct", block=(br, bc))


def gaussian_kernel1d(sigma, radius=None):
    """Sampled Gaussian, radius ``ceil(3 sigma)``, unit sum."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if radius is None:
        radius = int(math.ceil(3.0 * sigma))
    k = np.arange(-radius, radius + 1, dtype=np.float64)
    w = np.exp(-k * k / (2.0 * sigma * sigma))
    return w / w.sum()


def _reflect(j, n):
    # half-sample symmetric extension: ... c b a | a b c ... c | c b a ...
    j = np.mod(j, 2 * n)
    return np.where(j >= n, 2 * n - 1 - j, j)


def blur_matrix(n, sigma, radius=None):
    """``n x n`` sparse 1-D Gaussian blur with reflective boundaries."""
    w = gaussian_kernel1d(sigma, radius)
    r = (w.size - 1) // 2
    rows = np.repeat(np.arange(n), w.size)
    offs = np.tile(np.arange(-r, r + 1), n)
    cols = _reflect(rows + offs, n)
    vals = np.tile(w, n)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def gaussian_blur(shape, sigma, radius=None):
    return SeparableMap(blur_matrix(shape[0], sigma, radius), blur_matrix(shape[1], sigma, radius),
                        kind="gaussian_blur", sigma=sigma, radius=radius)


def blur_subsample(shape, factor, sigma=None):
    """Gaussian blur (``sigma = factor / 2`` by default) then keep every
    ``factor``-th pixel along each axis."""
    factor = int(factor)
    if factor < 1:
        raise ValueError("factor must be >= 1")
    if sigma is None:
        sigma = factor / 2.0
    R = blur_matrix(shape[0], sigma)[::factor].tocsr()
    C = blur_matrix(shape[1], sigma)[::factor].tocsr()
    return SeparableMap(R, C, kind="blur_subsample", sigma=sigma, factor=factor)


def difference_matrix(n):
    """``n x n`` forward differences, last row zero."""
    D = np.zeros((n, n))
    idx = np.arange(n - 1)
    D[idx, idx] = -1.0
    D[idx, idx + 1] = 1.0
    return D


def difference_1d(n):
    return MatrixMap(difference_matrix(n), kind="difference_1d")


def adjoint_mismatch(phi, rng=None, trials=5):
    """Largest relative ``|<Phi x, y> - <x, Phi^T y>|`` over random probes."""
    rng = np.random.default_rng(rng)
    worst = 0.0
    for _ in range(trials):
        x = rng.standard_normal(phi.in_shape)
        y = rng.standard_normal(phi.out_shape)
        lhs = np.vdot(phi.apply(x), y)
        rhs = np.vdot(x, phi.adjoint(y))
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    return worst
