"""Lowpass normalisation, QPH/QPL quantisation and 8-bit precision reduction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

QPH_RANGE = (1, 181)
QPL_RANGE = (1, 71)


def auto_qpl(qph: int) -> int:
    """Lowpass step tied to the directional one: floor(qph / 14), at least 1."""
    return max(1, qph // 14)


def _check(value: int, name: str, bounds: tuple[int, int]) -> int:
    if isinstance(value, bool) or int(value) != value or not bounds[0] <= value <= bounds[1]:
        raise ParameterError(f"{name} must be an integer in [{bounds[0]}, {bounds[1]}], got {value}")
    return int(value)


@dataclass(frozen=True)
class QuantParams:
    qph: int
    qpl: int

    def __post_init__(self):
        _check(self.qph, "QPH", QPH_RANGE)
        _check(self.qpl, "QPL", QPL_RANGE)

    @classmethod
    def auto(cls, qph: int) -> QuantParams:
        return cls(qph, auto_qpl(_check(qph, "QPH", QPH_RANGE)))


def round_half_away(x: np.ndarray) -> np.ndarray:
    return np.copysign(np.floor(np.abs(x) + 0.5), x)


def normalize_lowpass(plane: np.ndarray) -> np.ndarray:
    # the unit-DC-gain pyramid keeps the lowpass in pixel range, so a clamp suffices
    return np.clip(np.asarray(plane, dtype=np.float64), 0.0, 255.0)


def quantize(plane: np.ndarray, qp: int, kind: str) -> np.ndarray:
    """Divide by ``qp`` and round half away from zero into a byte.

    ``kind='lowpass'`` gives uint8 in [0, 255]; ``kind='directional'``
    gives int8 in [-128, 127].
    """
    x = np.asarray(plane, dtype=np.float64)
    if kind == "lowpass":
        _check(qp, "QPL", QPL_RANGE)
        return np.clip(round_half_away(x / qp), 0, 255).astype(np.uint8)
    if kind == "directional":
        _check(qp, "QPH", QPH_RANGE)
        return np.clip(round_half_away(x / qp), -128, 127).astype(np.int8)
    raise ParameterError(f"unknown component kind {kind!r}")


def dequantize(plane: np.ndarray, qp: int) -> np.ndarray:
    return np.asarray(plane).astype(np.float64) * qp
