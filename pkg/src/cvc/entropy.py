"""The lossless stage: byte-domain filters, zero run-length coding and DEFLATE.

Every plane reaching this module is a byte plane (uint8, or int8 viewed
as its two's-complement bytes).  All arithmetic wraps modulo 256 so every
operation has an exact inverse.

RLE token grammar: a 0x00 byte is always followed by a run length
k in [1, 255] standing for k zero samples; any other byte is a literal.
"""

from __future__ import annotations

import zlib
from typing import Sequence

import numpy as np

from .errors import DimensionError, StreamError

MAX_RUN = 255
DEFLATE_LEVEL = 9


def as_bytes(plane: np.ndarray) -> np.ndarray:
    """View an int8/uint8 array as uint8 without copying."""
    a = np.asarray(plane)
    if a.dtype == np.uint8:
        return a
    if a.dtype == np.int8:
        return a.view(np.uint8)
    raise DimensionError(f"expected a byte plane, got dtype {a.dtype}")


def column_filter(plane: np.ndarray) -> np.ndarray:
    """Replace every row but the first by its wrapped difference to the row above."""
    p = as_bytes(plane)
    out = p.copy()
    out[1:] = p[1:] - p[:-1]
    return out


def column_unfilter(plane: np.ndarray) -> np.ndarray:
    return np.cumsum(as_bytes(plane), axis=0, dtype=np.uint8)


def residual(current: np.ndarray, prediction: np.ndarray) -> np.ndarray:
    c, p = as_bytes(current), as_bytes(prediction)
    if c.shape != p.shape:
        raise DimensionError(f"residual shapes differ: {c.shape} vs {p.shape}")
    return c - p


def reconstruct(res: np.ndarray, prediction: np.ndarray) -> np.ndarray:
    r, p = as_bytes(res), as_bytes(prediction)
    if r.shape != p.shape:
        raise DimensionError(f"residual shapes differ: {r.shape} vs {p.shape}")
    return r + p


def rle_encode(plane: np.ndarray) -> bytes:
    """Zero run-length code a byte plane scanned row by row."""
    flat = as_bytes(plane).ravel()
    n = flat.size
    if n == 0:
        return b""
    zero = flat == 0
    edges = np.diff(np.concatenate(([0], zero.view(np.int8), [0])))
    starts = np.flatnonzero(edges == 1)
    lengths = np.flatnonzero(edges == -1) - starts
    tokens = -(-lengths // MAX_RUN)

    # output bytes contributed by each input sample
    contrib = (~zero).astype(np.int64)
    contrib[starts] = 2 * tokens
    offsets = np.cumsum(contrib) - contrib
    out = np.zeros(int(contrib.sum()), dtype=np.uint8)
    lit = ~zero
    out[offsets[lit]] = flat[lit]

    run_of_token = np.repeat(np.arange(len(starts)), tokens)
    first = np.cumsum(tokens) - tokens
    k = np.arange(run_of_token.size) - first[run_of_token]
    remaining = lengths[run_of_token] - k * MAX_RUN
    pos = offsets[starts][run_of_token] + 2 * k
    out[pos + 1] = np.minimum(remaining, MAX_RUN)
    return out.tobytes()


def rle_decode(stream: bytes, sample_count: int) -> np.ndarray:
    """Inverse of :func:`rle_encode`; returns a flat uint8 array."""
    s = np.frombuffer(stream, dtype=np.uint8)
    markers = np.flatnonzero(s == 0)
    if markers.size and markers[-1] == s.size - 1:
        raise StreamError("RLE stream ends inside a zero-run token")
    lens_at = markers + 1
    if np.any(s[lens_at] == 0):
        raise StreamError("RLE zero-run token with length 0")
    weights = np.ones(s.size, dtype=np.int64)
    weights[markers] = s[lens_at]
    weights[lens_at] = 0
    if int(weights.sum()) != sample_count:
        raise StreamError(f"RLE stream decodes to {int(weights.sum())} samples, "
                          f"expected {sample_count}")
    return np.repeat(s, weights)


def deflate(data: bytes) -> bytes:
    """Raw RFC 1951 stream (no zlib/gzip wrapper)."""
    c = zlib.compressobj(DEFLATE_LEVEL, zlib.DEFLATED, -15, 9, zlib.Z_DEFAULT_STRATEGY)
    return c.compress(bytes(data)) + c.flush()


def inflate(data: bytes, expected: int | None = None) -> bytes:
    d = zlib.decompressobj(-15)
    try:
        out = d.decompress(bytes(data)) + d.flush()
    except zlib.error as exc:
        raise StreamError(f"corrupt DEFLATE stream: {exc}") from None
    if not d.eof:
        raise StreamError("truncated DEFLATE stream")
    if expected is not None and len(out) != expected:
        raise StreamError(f"inflated {len(out)} bytes, expected {expected}")
    return out


def deflate_pack(sections: Sequence[bytes], mode: str) -> list[bytes]:
    """Scalable: one DEFLATE stream per section.  NTS: one stream for all."""
    if mode == "scalable":
        return [deflate(s) for s in sections]
    if mode == "nts":
        return [deflate(b"".join(sections))]
    raise ValueError(f"unknown packing mode {mode!r}")


def deflate_unpack(chunks: Sequence[bytes], mode: str, raw_lengths: Sequence[int]) -> list[bytes]:
    if mode == "scalable":
        if len(chunks) != len(raw_lengths):
            raise StreamError("section count does not match chunk count")
        return [inflate(c, n) for c, n in zip(chunks, raw_lengths)]
    if mode == "nts":
        if len(chunks) != 1:
            raise StreamError("NTS frames carry exactly one DEFLATE stream")
        joint = inflate(chunks[0], sum(raw_lengths))
        bounds = np.concatenate(([0], np.cumsum(raw_lengths))).astype(int)
        return [joint[a:b] for a, b in zip(bounds[:-1], bounds[1:])]
    raise ValueError(f"unknown packing mode {mode!r}")
