"""RGB frames, the YCoCg colour transform and chroma resampling."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionError, ParameterError

CHROMA_OFFSET = 127.0
CHROMA_FACTORS = (1, 2, 4, 8)
MIN_SIDE = 16


@dataclass
class RgbFrame:
    """An 8-bit RGB raster, stored as a ``(height, width, 3)`` uint8 array."""

    data: np.ndarray
    index: int = 0
    # decoded reduced-scale frames may legitimately be smaller than 16x16
    min_side: int = field(default=MIN_SIDE, repr=False, compare=False)

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 3 or data.shape[2] != 3:
            raise DimensionError(f"RGB data must be (height, width, 3), got {data.shape}")
        if data.shape[0] < self.min_side or data.shape[1] < self.min_side:
            raise DimensionError(f"frames must be at least {self.min_side}x{self.min_side}, got "
                                 f"{data.shape[1]}x{data.shape[0]}")
        self.data = np.ascontiguousarray(data, dtype=np.uint8)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @classmethod
    def from_bytes(cls, raw: bytes, width: int, height: int, index: int = 0,
                   min_side: int = MIN_SIDE) -> RgbFrame:
        if len(raw) != width * height * 3:
            raise DimensionError(f"expected {width * height * 3} bytes, got {len(raw)}")
        arr = np.frombuffer(raw, dtype=np.uint8).reshape(height, width, 3)
        return cls(arr.copy(), index, min_side)

    def tobytes(self) -> bytes:
        return self.data.tobytes()


@dataclass
class YcocgFrame:
    """Real-valued YCoCg planes; chroma carries the +127 offset.

    With ``chroma_factor`` N the chroma planes are ceil(h/N) x ceil(w/N).
    """

    y: np.ndarray
    co: np.ndarray
    cg: np.ndarray
    chroma_factor: int = 1

    @property
    def width(self) -> int:
        return self.y.shape[1]

    @property
    def height(self) -> int:
        return self.y.shape[0]


def luma(rgb: np.ndarray) -> np.ndarray:
    """Y = R/4 + G/2 + B/4 of an (h, w, 3) array, as float64."""
    c = np.asarray(rgb, dtype=np.float64)
    return 0.25 * c[..., 0] + 0.5 * c[..., 1] + 0.25 * c[..., 2]


def rgb_to_ycocg(frame: RgbFrame) -> YcocgFrame:
    c = frame.data.astype(np.float64)
    r, g, b = c[..., 0], c[..., 1], c[..., 2]
    y = 0.25 * r + 0.5 * g + 0.25 * b
    co = 0.5 * r - 0.5 * b + CHROMA_OFFSET
    cg = -0.25 * r + 0.5 * g - 0.25 * b + CHROMA_OFFSET
    return YcocgFrame(y, co, cg, 1)


def ycocg_to_rgb(frame: YcocgFrame, index: int = 0, min_side: int = MIN_SIDE) -> RgbFrame:
    if frame.chroma_factor != 1 or frame.co.shape != frame.y.shape or frame.cg.shape != frame.y.shape:
        raise DimensionError("chroma must be upsampled to full resolution before conversion")
    y = np.asarray(frame.y, dtype=np.float64)
    co = np.asarray(frame.co, dtype=np.float64) - CHROMA_OFFSET
    cg = np.asarray(frame.cg, dtype=np.float64) - CHROMA_OFFSET
    rgb = np.stack([y + co - cg, y + cg, y - co - cg], axis=-1)
    return RgbFrame(np.clip(np.round(rgb), 0, 255).astype(np.uint8), index, min_side)


def subsample_chroma(frame: YcocgFrame, n: int) -> YcocgFrame:
    """Point-sample chroma at the top-left corner of every n x n cell."""
    if n not in CHROMA_FACTORS:
        raise ParameterError(f"chroma factor must be one of {CHROMA_FACTORS}, got {n}")
    if frame.chroma_factor != 1:
        raise DimensionError("frame chroma is already subsampled")
    if n == 1:
        return frame
    return replace(frame, co=frame.co[::n, ::n].copy(), cg=frame.cg[::n, ::n].copy(),
                   chroma_factor=n)


def upsample_plane(plane: np.ndarray, n: int, shape: tuple[int, int]) -> np.ndarray:
    """Bilinear interpolation of a plane sampled at every n-th pixel.

    Output pixel (i, j) reads the coarse grid at (i/n, j/n); positions past
    the last coarse sample replicate the edge.
    """
    p = np.asarray(plane, dtype=np.float64)
    if n == 1 and p.shape == tuple(shape):
        return p.copy()

    def axis(length: int, coarse: int):
        pos = np.arange(length) / n
        i0 = np.minimum(np.floor(pos).astype(int), coarse - 1)
        i1 = np.minimum(i0 + 1, coarse - 1)
        t = np.clip(pos - i0, 0.0, 1.0)
        t[i0 == i1] = 0.0
        return i0, i1, t

    r0, r1, tr = axis(shape[0], p.shape[0])
    c0, c1, tc = axis(shape[1], p.shape[1])
    top = p[r0][:, c0] * (1 - tc) + p[r0][:, c1] * tc
    bottom = p[r1][:, c0] * (1 - tc) + p[r1][:, c1] * tc
    return top * (1 - tr)[:, None] + bottom * tr[:, None]


def upsample_chroma(frame: YcocgFrame) -> YcocgFrame:
    n = frame.chroma_factor
    if n == 1 and frame.co.shape == frame.y.shape:
        return frame
    shape = frame.y.shape
    return replace(frame, co=upsample_plane(frame.co, n, shape),
                   cg=upsample_plane(frame.cg, n, shape), chroma_factor=1)
