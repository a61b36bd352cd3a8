"""Binary 8-bit PGM (P5) reading and writing."""

import os
import tempfile

import numpy as np


class PGMError(ValueError):
    pass


def _tokens(data, count, pos):
    out = []
    n = len(data)
    while len(out) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise PGMError("truncated PGM header")
        out.append(data[start:pos])
    return out, pos


def decode_pgm(data):
    """Raw 8-bit pixel array from P5 bytes."""
    if data[:2] != b"P5":
        raise PGMError("not a binary PGM (P5) file")
    (w, h, maxval), pos = _tokens(data, 3, 2)
    try:
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError as exc:
        raise PGMError("malformed PGM header") from exc
    if not 0 < maxval < 256:
        raise PGMError(f"only 8-bit PGM is supported (maxval={maxval})")
    pos += 1  # single whitespace byte before the raster
    raster = data[pos:pos + w * h]
    if len(raster) != w * h:
        raise PGMError("truncated PGM raster")
    return np.frombuffer(raster, dtype=np.uint8).reshape(h, w).copy(), maxval


def read_pgm(path, normalize=True):
    """Load a P5 image; by default scaled to [0, 1] by its maxval."""
    with open(path, "rb") as fh:
        pixels, maxval = decode_pgm(fh.read())
    if normalize:
        return pixels.astype(np.float64) / maxval
    return pixels


def quantize(img):
    """``round(255 v)`` clamped to [0, 255]."""
    return np.clip(np.rint(np.asarray(img, dtype=np.float64) * 255.0), 0, 255).astype(np.uint8)


def encode_pgm(img):
    img = np.asarray(img)
    if img.ndim != 2:
        raise PGMError("PGM images are 2-D")
    if img.dtype != np.uint8:
        img = quantize(img)
    h, w = img.shape
    return b"P5\n%d %d\n255\n" % (w, h) + img.tobytes()


def atomic_write_bytes(path, payload):
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_pgm(path, img):
    """Write a float image in [0, 1] (quantized) or a uint8 image verbatim."""
    atomic_write_bytes(path, encode_pgm(img))
