"""Bundled test images and synthetic phantoms.

``portrait`` is a 128x128 grayscale crop of the face in scikit-image's public
domain ``astronaut`` photograph (smooth content). ``texture`` is a 128x128
crop of scikit-image's CC0 ``grass`` image (dense texture).
"""

from importlib import resources

import numpy as np

from .core.pgm import decode_pgm

IMAGES = ("portrait", "texture")


def load(name):
    """Bundled image as floats in [0, 1]."""
    if name not in IMAGES:
        raise KeyError(f"unknown corpus image {name!r}; choose from {IMAGES}")
    data = resources.files("ssimopt").joinpath(f"data/{name}.pgm").read_bytes()
    pixels, maxval = decode_pgm(data)
    return pixels.astype(np.float64) / maxval


def checkerboard(size=64, square=8, low=0.2, high=0.8):
    i, j = np.indices((size, size))
    return np.where(((i // square) + (j // square)) % 2 == 0, low, high).astype(np.float64)


def smooth_blob(size=64):
    i, j = np.indices((size, size)) / (size - 1.0)
    return 0.5 + 0.3 * np.cos(3.0 * i) * np.sin(2.0 + 2.5 * j)


def dct_sparse(size=32, k=18, block=8, seed=0):
    """Image whose every ``block x block`` tile has exactly ``k`` nonzero DCT
    coefficients besides its mean."""
    from .core.operators import block_dct

    rng = np.random.default_rng(seed)
    coef = np.zeros((size, size))
    for r in range(0, size, block):
        for c in range(0, size, block):
            idx = rng.choice(block * block - 1, size=k, replace=False) + 1
            tile = np.zeros(block * block)
            tile[idx] = rng.choice([-1.0, 1.0], size=k) * rng.uniform(0.05, 0.2, size=k)
            tile[0] = 0.5 * block
            coef[r:r + block, c:c + block] = tile.reshape(block, block)
    return block_dct((size, size), block).apply(coef)


def desk_instances():
    """Small fixed ADMM problems used as a convergence check.

    Returns ``{name: (problem, solver)}`` with ``solver`` either ``"admm3"``
    or ``"admm4"``.
    """
    from .admm import SplitProblem
    from .core.operators import MatrixMap, blur_subsample, dct_matrix, difference_1d
    from .core.operators import gaussian_blur, identity
    from .core.blocks import BlockScheme

    rng = np.random.default_rng(2024)
    v4 = np.array([0.9, -0.3, 0.4, -0.8])
    patch = smooth_blob(16) + 0.05 * rng.standard_normal((16, 16))
    s8 = BlockScheme.square(8)

    def pen(y, c, centered=True):
        # T has curvature ~ 1 / ||y||^2, so the penalties scale with it
        y = np.asarray(y, dtype=np.float64)
        y = y - y.mean() if centered else y
        return {"rho": c / float(np.sum(y * y)), "mu": c / float(np.sum(y * y))}

    A8, y8 = rng.standard_normal((8, 8)), rng.standard_normal(8)
    return {
        "l1_dct4": (SplitProblem(MatrixMap(dct_matrix(4).T), v4, "l1", 0.05),
                    "admm3"),
        "tv1d_4": (SplitProblem(identity((4,)), [0.6, -0.2, 0.3, -0.7], "tv", 0.1), "admm4"),
        "tikhonov_diff16": (SplitProblem(identity((16,)), rng.standard_normal(16), "tikhonov", 0.3,
                                         reg_map=difference_1d(16)), "admm3"),
        "l1_matrix8": (SplitProblem(MatrixMap(A8), y8, "l1", 0.02, **pen(y8, 1.0)), "admm3"),
        "tv_patch16": (SplitProblem(identity((16, 16)), patch, "tv", 0.002), "admm3"),
        "mt_tv_patch16": (SplitProblem(identity((16, 16)), patch, "tv", 0.001, scheme=s8,
                                       **pen(patch, 1.0, centered=False)), "admm3"),
        "blur_tv16": (SplitProblem(gaussian_blur((16, 16), 1.0), patch, "tv", 0.001,
                                   **pen(patch, 0.3)), "admm4"),
        "zoom_tv16": (SplitProblem(blur_subsample((16, 16), 2), patch[::2, ::2], "tv", 0.001,
                                   **pen(patch[::2, ::2], 0.1)), "admm4"),
    }
