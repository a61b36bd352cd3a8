"""Non-overlapping block partitions of 2-D images."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BlockScheme:
    """Tiling of an image into ``block_rows x block_cols`` blocks.

    Blocks are visited in row-major order. When the image size is not a
    multiple of the block size, the last row/column of blocks is truncated
    at the boundary (no padding).
    """

    block_rows: int = 8
    block_cols: int = 8
    policy: str = "truncate"

    def __post_init__(self):
        if self.block_rows < 1 or self.block_cols < 1:
            raise ValueError("block dimensions must be >= 1")
        if self.policy != "truncate":
            raise ValueError(f"unsupported edge policy {self.policy!r}")

    @classmethod
    def square(cls, size):
        return cls(int(size), int(size))

    def row_starts(self, shape):
        return np.arange(0, shape[0], self.block_rows)

    def col_starts(self, shape):
        return np.arange(0, shape[1], self.block_cols)

    def grid(self, shape):
        """Number of blocks along each axis."""
        return len(self.row_starts(shape)), len(self.col_starts(shape))

    def count(self, shape):
        gr, gc = self.grid(shape)
        return gr * gc

    def sizes(self, shape):
        """Per-axis block extents (the last ones may be truncated)."""
        rs = np.diff(np.append(self.row_starts(shape), shape[0]))
        cs = np.diff(np.append(self.col_starts(shape), shape[1]))
        return rs, cs

    def slices(self, shape):
        out = []
        for r0 in self.row_starts(shape):
            for c0 in self.col_starts(shape):
                out.append((slice(r0, min(r0 + self.block_rows, shape[0])),
                            slice(c0, min(c0 + self.block_cols, shape[1]))))
        return out

    def is_uniform(self, shape):
        return shape[0] % self.block_rows == 0 and shape[1] % self.block_cols == 0

    def split(self, img):
        """List of blocks (views) in row-major block order."""
        img = np.asarray(img)
        return [img[s] for s in self.slices(img.shape)]

    def merge(self, blocks, shape):
        out = np.empty(shape, dtype=np.result_type(*[np.asarray(b) for b in blocks]))
        sl = self.slices(shape)
        if len(blocks) != len(sl):
            raise ValueError(f"expected {len(sl)} blocks, got {len(blocks)}")
        for s, b in zip(sl, blocks):
            out[s] = b
        return out

    def pack(self, img):
        """Stack flattened blocks as rows of an ``(N, block_rows*block_cols)``
        array; truncated blocks are zero-padded on the right."""
        img = np.asarray(img, dtype=np.float64)
        if self.is_uniform(img.shape):
            gr, gc = self.grid(img.shape)
            br, bc = self.block_rows, self.block_cols
            return (img.reshape(gr, br, gc, bc).transpose(0, 2, 1, 3)
                    .reshape(gr * gc, br * bc).copy())
        n = self.block_rows * self.block_cols
        sl = self.slices(img.shape)
        out = np.zeros((len(sl), n))
        for k, s in enumerate(sl):
            b = img[s].ravel()
            out[k, :b.size] = b
        return out

    def unpack(self, rows, shape):
        """Inverse of :meth:`pack`."""
        rows = np.asarray(rows, dtype=np.float64)
        if self.is_uniform(shape):
            gr, gc = self.grid(shape)
            br, bc = self.block_rows, self.block_cols
            return rows.reshape(gr, gc, br, bc).transpose(0, 2, 1, 3).reshape(shape).copy()
        out = np.empty(shape)
        for k, s in enumerate(self.slices(shape)):
            h = s[0].stop - s[0].start
            w = s[1].stop - s[1].start
            out[s] = rows[k, :h * w].reshape(h, w)
        return out

    def block_sums(self, img):
        """Per-block sums as a ``grid(shape)`` array."""
        img = np.asarray(img, dtype=np.float64)
        tmp = np.add.reduceat(img, self.row_starts(img.shape), axis=0)
        return np.add.reduceat(tmp, self.col_starts(img.shape), axis=1)

    def block_counts(self, shape):
        rs, cs = self.sizes(shape)
        return np.outer(rs, cs)

    def expand(self, values, shape):
        """Tile one value per block back to pixel resolution."""
        rs, cs = self.sizes(shape)
        values = np.asarray(values).reshape(len(rs), len(cs))
        return np.repeat(np.repeat(values, rs, axis=0), cs, axis=1)

    def block_means(self, img):
        img = np.asarray(img, dtype=np.float64)
        return self.block_sums(img) / self.block_counts(img.shape)
