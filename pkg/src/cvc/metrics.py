"""Luma PSNR between RGB frames and clips."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import DimensionError
from .pixels import RgbFrame, luma

PEAK = 255.0


def psnr(a: np.ndarray, b: np.ndarray, peak: float = PEAK) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError(f"cannot compare {a.shape} with {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    return math.inf if mse == 0 else 10.0 * math.log10(peak * peak / mse)


def y_psnr(ref: RgbFrame, test: RgbFrame) -> float:
    """PSNR of Y = R/4 + G/2 + B/4 computed from both RGB frames."""
    return psnr(luma(ref.data), luma(test.data))


def clip_y_psnr(ref: Sequence[RgbFrame], test: Sequence[RgbFrame]) -> list[float]:
    if len(ref) != len(test):
        raise DimensionError(f"clips hold {len(ref)} and {len(test)} frames")
    return [y_psnr(r, t) for r, t in zip(ref, test)]


def mean_db(values: Sequence[float]) -> float:
    """Arithmetic mean of per-frame PSNR; inf as soon as one frame is lossless."""
    return float(np.mean(values)) if len(values) else math.nan


def format_db(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.4f}"
