"""Full-search block motion estimation and contourlet-domain compensation.

Vectors are estimated on 16x16 luma blocks.  Vector (dx, dy) predicts the
block at (y, x) from ``previous[y + dy, x + dx]``, with the previous
frame replicate-padded past its borders.  Compensation maps every block's
footprint and vector onto the grid of an individual contourlet component.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .quant import round_half_away

BLOCK = 16
MAX_SEARCH = 127


@dataclass
class MotionField:
    """Per-block vectors: ``vectors[by, bx] = (dx, dy)``."""

    vectors: np.ndarray
    mse: np.ndarray | None = None
    block_size: int = BLOCK

    @property
    def grid(self) -> tuple[int, int]:
        return self.vectors.shape[:2]

    @classmethod
    def zeros(cls, rows: int, cols: int) -> MotionField:
        return cls(np.zeros((rows, cols, 2), dtype=np.int64))

    def to_bytes(self) -> bytes:
        return self.vectors.astype(np.int8).tobytes()

    @classmethod
    def from_bytes(cls, raw: bytes, rows: int, cols: int) -> MotionField:
        if len(raw) != rows * cols * 2:
            raise DimensionError(f"motion section holds {len(raw)} bytes, expected {rows * cols * 2}")
        v = np.frombuffer(raw, dtype=np.int8).reshape(rows, cols, 2)
        return cls(v.astype(np.int64))


def candidate_order(w: int) -> list[tuple[int, int]]:
    """All (dx, dy) in the search window, in tie-break priority order."""
    cands = [(dx, dy) for dy in range(-w, w + 1) for dx in range(-w, w + 1)]
    cands.sort(key=lambda v: (abs(v[0]) + abs(v[1]), v[1], v[0]))
    return cands


def _pad_to_blocks(p: np.ndarray) -> np.ndarray:
    h, w = p.shape
    return np.pad(p, ((0, -h % BLOCK), (0, -w % BLOCK)), mode="edge")


def estimate_motion(current: np.ndarray, previous: np.ndarray, w: int) -> MotionField:
    cur = np.asarray(current, dtype=np.float64)
    prev = np.asarray(previous, dtype=np.float64)
    if cur.shape != prev.shape or cur.ndim != 2:
        raise DimensionError(f"luma planes differ: {cur.shape} vs {prev.shape}")
    if not 0 <= w <= MAX_SEARCH:
        raise ParameterError(f"search range must be in [0, {MAX_SEARCH}], got {w}")
    cur = _pad_to_blocks(cur)
    prev = np.pad(_pad_to_blocks(prev), w, mode="edge")
    h, wd = cur.shape
    by, bx = h // BLOCK, wd // BLOCK
    cands = candidate_order(w)
    ssd = np.empty((len(cands), by, bx))
    for i, (dx, dy) in enumerate(cands):
        diff = cur - prev[w + dy:w + dy + h, w + dx:w + dx + wd]
        diff *= diff
        ssd[i] = diff.reshape(by, BLOCK, bx, BLOCK).sum(axis=(1, 3))
    # argmin keeps the first minimum, i.e. the tie-break order of cands
    best = ssd.argmin(axis=0)
    table = np.array(cands, dtype=np.int64)
    mse = np.take_along_axis(ssd, best[None], axis=0)[0] / (BLOCK * BLOCK)
    return MotionField(table[best], mse)


@dataclass(frozen=True)
class Component:
    """Geometry of one contourlet component relative to the luma grid.

    ``fy``/``fx`` are luma pixels per component cell along each axis.
    """

    rows: int
    cols: int
    fy: float
    fx: float

    @classmethod
    def of(cls, shape: tuple[int, int], channel_shape: tuple[int, int], chroma_n: int = 1) -> Component:
        """Component of ``shape`` cut from a (padded) channel of ``channel_shape``."""
        return cls(shape[0], shape[1],
                   chroma_n * channel_shape[0] / shape[0],
                   chroma_n * channel_shape[1] / shape[1])


def lowpass_component(channel_shape, levels: int, chroma_n: int = 1) -> Component:
    f = 2 ** levels
    return Component.of((channel_shape[0] // f, channel_shape[1] // f), channel_shape, chroma_n)


def map_vector(v, component: Component) -> tuple[int, int]:
    dx, dy = v
    return (int(round_half_away(dx / component.fx)), int(round_half_away(dy / component.fy)))


def footprint_bounds(blocks: int, cells: int, factor: float) -> np.ndarray:
    """Cell boundaries of ``blocks`` consecutive luma blocks along one axis.

    Boundaries follow the geometric block edges, are forced to give every
    block at least one cell while cells remain, and the last block absorbs
    the rest of the axis, so the footprints tile it exactly.
    """
    b = [0]
    if cells >= blocks:
        for i in range(1, blocks):
            v = int(round_half_away(BLOCK * i / factor))
            b.append(min(max(v, b[-1] + 1), cells - (blocks - i)))
    else:
        b.extend(min(i, cells) for i in range(1, blocks))
    b.append(cells)
    return np.array(b)


def _cell_vectors(field: MotionField, component: Component) -> tuple[np.ndarray, np.ndarray]:
    by, bx = field.grid
    rb = footprint_bounds(by, component.rows, component.fy)
    cb = footprint_bounds(bx, component.cols, component.fx)
    mdx = round_half_away(field.vectors[..., 0] / component.fx).astype(np.int64)
    mdy = round_half_away(field.vectors[..., 1] / component.fy).astype(np.int64)
    rrep, crep = np.diff(rb), np.diff(cb)
    mdx = np.repeat(np.repeat(mdx, rrep, axis=0), crep, axis=1)
    mdy = np.repeat(np.repeat(mdy, rrep, axis=0), crep, axis=1)
    return mdx, mdy


def motion_compensate(reference: np.ndarray, field: MotionField, component: Component) -> np.ndarray:
    """Predict a component by copying displaced cells of the reference."""
    ref = np.asarray(reference)
    if ref.shape != (component.rows, component.cols):
        raise DimensionError(f"reference {ref.shape} does not match component "
                             f"{(component.rows, component.cols)}")
    mdx, mdy = _cell_vectors(field, component)
    rows = np.arange(component.rows)[:, None] + mdy
    cols = np.arange(component.cols)[None, :] + mdx
    return ref[np.clip(rows, 0, component.rows - 1), np.clip(cols, 0, component.cols - 1)]
