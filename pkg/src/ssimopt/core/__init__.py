from .blocks import BlockScheme
from .metrics import (
    DEFAULT_CONSTANTS,
    SsimConstants,
    block_ssim,
    block_T,
    center,
    dissim_T,
    grad_T,
    mssim,
    mt_fidelity,
    psnr,
    ssim_full,
    ssim_map,
    ssim_simplified,
)
from .operators import (
    ComposedMap,
    IdentityMap,
    LinearMap,
    MatrixMap,
    SeparableMap,
    adjoint_mismatch,
    block_dct,
    blur_subsample,
    difference_1d,
    gaussian_blur,
    identity,
)
from .pgm import read_pgm, write_pgm

__all__ = [
    "BlockScheme", "DEFAULT_CONSTANTS", "SsimConstants", "block_ssim", "block_T", "center",
    "dissim_T", "grad_T", "mssim", "mt_fidelity", "psnr", "ssim_full", "ssim_map",
    "ssim_simplified", "ComposedMap", "IdentityMap", "LinearMap", "MatrixMap", "SeparableMap",
    "adjoint_mismatch", "block_dct", "blur_subsample", "difference_1d", "gaussian_blur",
    "identity", "read_pgm", "write_pgm",
]
