"""Contourlet transform: Laplacian pyramid plus a directional filter bank.

The Laplacian pyramid uses the Cohen-Daubechies 9-7 pair with the analysis
lowpass scaled to unit DC gain, so the coarse image stays in pixel range.

The directional filter bank (DFB) is a binary tree of two-channel quincunx
fan filter banks.  Every node is realised with the four lifting steps of
the 9-7 wavelet, lifted to the quincunx lattice by replacing the two 1-D
neighbours with the four lattice neighbours ``n +- a`` and ``n +- b`` of
the node's sampling basis.  The neighbours along ``a`` enter with a
negative sign, which modulates the diamond split into a fan split.  The
node bases are sheared versions of each other chosen so that level ``k``
cuts every wedge through its centre slope, which yields the usual
uniform-slope wedge partition.  Lifting makes every node exactly
invertible whatever the neighbour values are, so the whole tree is
perfectly reconstructing by construction.  Both channels of every node
carry passband gain sqrt(2), which keeps each split close to orthonormal.

All DFB filtering is periodic: the transform runs in place on the plane
seen as a torus, and each leaf is a coset of an axis-aligned lattice that
is read out with a strided slice.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DimensionError, ParameterError

# Cohen-Daubechies-Feauveau 9-7 pair, normalised so the analysis lowpass
# sums to 1 and the synthesis lowpass sums to 1 (doubled on use, since the
# expansion step interpolates a zero-stuffed signal).
ANALYSIS_LOWPASS = np.array([
    0.026748757410810, -0.016864118442875, -0.078223266528990,
    0.266864118442875, 0.602949018236360, 0.266864118442875,
    -0.078223266528990, -0.016864118442875, 0.026748757410810,
])
SYNTHESIS_LOWPASS = np.array([
    -0.045635881557125, -0.028771763114250, 0.295635881557125,
    0.557543526228500, 0.295635881557125, -0.028771763114250,
    -0.045635881557125,
])

# Lifting factorisation of the same 9-7 pair.
LIFT_ALPHA = -1.586134342059924
LIFT_BETA = -0.052980118572961
LIFT_GAMMA = 0.882911075530934
LIFT_DELTA = 0.443506852043971
LIFT_K = 1.230174104914001
_LIFT_STEPS = (  # (coefficient, target coset)
    (LIFT_ALPHA, 1),
    (LIFT_BETA, 0),
    (LIFT_GAMMA, 1),
    (LIFT_DELTA, 0),
)
# Passband gain sqrt(2) on both channels makes each split nearly
# orthonormal, so rounding noise in the subbands is not amplified on synthesis.
_SCALE = (np.sqrt(2.0) / LIFT_K, LIFT_K / np.sqrt(2.0))

MAX_DFB_LEVELS = 4


@dataclass(frozen=True)
class FilterBank97:
    """The 9-7 kernels in the form the pyramid uses them."""

    analysis_lowpass: np.ndarray = field(default_factory=lambda: ANALYSIS_LOWPASS.copy())
    synthesis_lowpass: np.ndarray = field(default_factory=lambda: 2.0 * SYNTHESIS_LOWPASS)

    @property
    def analysis_highpass(self) -> np.ndarray:
        # g[n] = (-1)^n h~[n], the standard biorthogonal relation
        h = SYNTHESIS_LOWPASS.copy()
        h[1::2] *= -1
        return h

    @property
    def synthesis_highpass(self) -> np.ndarray:
        g = ANALYSIS_LOWPASS.copy()
        g[1::2] *= -1
        return g


FILTERS = FilterBank97()


@dataclass
class CtRepr:
    """Contourlet coefficients of one plane.

    ``scales[0]`` is the coarsest detail level; ``scales[s]`` holds
    ``2 ** dfb_levels[s]`` directional subbands.  ``shape`` is the size of
    the plane that was transformed.
    """

    lowpass: np.ndarray
    scales: list[list[np.ndarray]]
    dfb_levels: tuple[int, ...]
    shape: tuple[int, int]

    @property
    def levels(self) -> int:
        return len(self.dfb_levels)

    def detail_shape(self, s: int) -> tuple[int, int]:
        """Size of the pyramid detail image at scale ``s``."""
        f = 2 ** (self.levels - 1 - s)
        return (self.shape[0] // f, self.shape[1] // f)

    def coefficient_count(self) -> int:
        return self.lowpass.size + sum(b.size for sc in self.scales for b in sc)

    def map(self, fn) -> CtRepr:
        """Apply ``fn`` to every plane, returning a new representation."""
        return CtRepr(
            lowpass=fn(self.lowpass),
            scales=[[fn(b) for b in sc] for sc in self.scales],
            dfb_levels=self.dfb_levels,
            shape=self.shape,
        )


# ---------------------------------------------------------------------------
# Laplacian pyramid


def _filter_axis(x: np.ndarray, taps: np.ndarray, axis: int) -> np.ndarray:
    half = len(taps) // 2
    pad = [(0, 0)] * x.ndim
    pad[axis] = (half, half)
    xp = np.pad(x, pad, mode="reflect")
    n = x.shape[axis]
    out = np.zeros_like(x)
    for i, t in enumerate(taps):
        out += t * np.take(xp, range(i, i + n), axis=axis)
    return out


def _filter2(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    return _filter_axis(_filter_axis(x, taps, 0), taps, 1)


def _expand(low: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    up = np.zeros(shape)
    up[::2, ::2] = low
    return _filter2(up, FILTERS.synthesis_lowpass)


def lp_analysis(plane: np.ndarray, lowpass_map=None) -> tuple[np.ndarray, np.ndarray]:
    """One pyramid level: half-size lowpass and full-size prediction residual.

    ``lowpass_map`` is applied to the lowpass before the residual is taken,
    so whatever it changes is carried by the residual instead of being lost.
    """
    x = np.asarray(plane, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] % 2 or x.shape[1] % 2:
        raise DimensionError(f"pyramid input must be 2-D with even sides, got {x.shape}")
    low = _filter2(x, FILTERS.analysis_lowpass)[::2, ::2]
    if lowpass_map is not None:
        low = lowpass_map(low)
    return low, x - _expand(low, x.shape)


def lp_synthesis(lowpass: np.ndarray, detail: np.ndarray) -> np.ndarray:
    detail = np.asarray(detail, dtype=np.float64)
    h, w = detail.shape
    if lowpass.shape != (h // 2, w // 2) or h % 2 or w % 2:
        raise DimensionError(f"lowpass {lowpass.shape} does not match detail {detail.shape}")
    return detail + _expand(np.asarray(lowpass, dtype=np.float64), detail.shape)


# ---------------------------------------------------------------------------
# Directional filter bank


@dataclass(frozen=True)
class _Node:
    level: int            # 1-based depth of the split performed at this node
    vertical: bool        # wedge in the |xi1/xi2| <= 1 half
    centre: float         # centre slope of the wedge (xi2/xi1, or xi1/xi2 if vertical)
    offset: tuple[int, int]
    a: tuple[int, int]
    b: tuple[int, int]


def _basis(level: int, vertical: bool, centre: float) -> tuple[tuple[int, int], tuple[int, int]]:
    if level == 0:
        return (1, 0), (0, 1)
    m = 2 ** (level - 1)
    q = int(round(m * centre))
    a, b = (1 + q, -m), (q - 1, -m)
    if vertical:
        a, b = a[::-1], b[::-1]
    return a, b


def _tree(levels: int) -> list[list[_Node]]:
    """Nodes of the DFB tree, grouped by depth; leaves are the last group."""
    root = _Node(0, False, 0.0, (0, 0), (1, 0), (0, 1))
    tree = [[root]]
    for depth in range(1, levels + 1):
        children = []
        for node in tree[-1]:
            for coset in (0, 1):
                if depth == 1:
                    vertical, centre, half = bool(coset), 0.0, 1.0
                else:
                    vertical = node.vertical
                    half = 2.0 ** -(depth - 1)
                    centre = node.centre + (half if coset else -half)
                off = node.offset
                if coset:
                    off = (off[0] + node.a[0], off[1] + node.a[1])
                a, b = _basis(depth, vertical, centre)
                children.append(_Node(depth, vertical, centre, off, a, b))
        tree.append(children)
    return tree


def _coset_mask(shape, offset, a, b) -> np.ndarray:
    """Points of ``offset + span(a + b, a - b)`` on the torus of ``shape``."""
    u = (a[0] + b[0], a[1] + b[1])
    v = (a[0] - b[0], a[1] - b[1])
    det = u[0] * v[1] - u[1] * v[0]
    n1, n2 = np.meshgrid(np.arange(shape[0]), np.arange(shape[1]), indexing="ij")
    d1 = n1 - offset[0]
    d2 = n2 - offset[1]
    c1 = v[1] * d1 - v[0] * d2
    c2 = -u[1] * d1 + u[0] * d2
    return (c1 % det == 0) & (c2 % det == 0)


@lru_cache(maxsize=64)
def _plan(shape: tuple[int, int], levels: int):
    tree = _tree(levels)
    steps = []
    for parents in tree[:-1]:
        for node in parents:
            m0 = _coset_mask(shape, node.offset, node.a, node.b)
            off1 = (node.offset[0] + node.a[0], node.offset[1] + node.a[1])
            m1 = _coset_mask(shape, off1, node.a, node.b)
            scale = 1.0 + m0 * (_SCALE[0] - 1.0) + m1 * (_SCALE[1] - 1.0)
            steps.append((node, (m0, m1), scale))
    return tree, steps


def _neighbour_sum(x: np.ndarray, a, b) -> np.ndarray:
    # b-neighbours minus a-neighbours: a diamond split turned into a fan split
    return (np.roll(x, b, axis=(0, 1)) + np.roll(x, (-b[0], -b[1]), axis=(0, 1))
            - np.roll(x, a, axis=(0, 1)) - np.roll(x, (-a[0], -a[1]), axis=(0, 1)))


def _leaf_slices(node: _Node, levels: int):
    if levels == 1:
        return None
    step = 2 ** (levels - 1)
    if node.vertical:
        return (slice(node.offset[0] % step, None, step), slice(node.offset[1] % 2, None, 2))
    return (slice(node.offset[0] % 2, None, 2), slice(node.offset[1] % step, None, step))


def _check_dfb(shape, levels: int) -> None:
    if not 1 <= levels <= MAX_DFB_LEVELS:
        raise ParameterError(f"DFB levels must be in [1, {MAX_DFB_LEVELS}], got {levels}")
    f = 2 ** levels
    if shape[0] % f or shape[1] % f:
        raise DimensionError(f"DFB input {shape} not divisible by {f}")


def _quincunx_pack(x: np.ndarray, parity: int) -> np.ndarray:
    h, w = x.shape
    out = np.empty((h, w // 2))
    out[0::2] = x[0::2, parity::2]
    out[1::2] = x[1::2, 1 - parity::2]
    return out


def _quincunx_unpack(x: np.ndarray, out: np.ndarray, parity: int) -> None:
    out[0::2, parity::2] = x[0::2]
    out[1::2, 1 - parity::2] = x[1::2]


def dfb_analysis(detail: np.ndarray, levels: int) -> list[np.ndarray]:
    """Split ``detail`` into ``2 ** levels`` critically sampled directional subbands.

    With xi1 the frequency along rows and xi2 along columns, the first
    half of the subbands holds the wedges with |xi2/xi1| <= 1 and the
    second half those with |xi1/xi2| <= 1, each sorted by increasing slope.
    """
    x = np.array(detail, dtype=np.float64)
    _check_dfb(x.shape, levels)
    tree, steps = _plan(x.shape, levels)
    for node, masks, scale in steps:
        for coef, target in _LIFT_STEPS:
            x += (0.5 * coef) * masks[target] * _neighbour_sum(x, node.a, node.b)
        x *= scale
    leaves = tree[-1]
    if levels == 1:
        return [_quincunx_pack(x, 0), _quincunx_pack(x, 1)]
    return [x[_leaf_slices(leaf, levels)].copy() for leaf in leaves]


def dfb_synthesis(subbands: Sequence[np.ndarray], levels: int) -> np.ndarray:
    if len(subbands) != 2 ** levels:
        raise DimensionError(f"expected {2 ** levels} subbands, got {len(subbands)}")
    if levels == 1:
        h, w2 = subbands[0].shape
        shape = (h, 2 * w2)
    else:
        s0 = subbands[0].shape
        shape = (2 * s0[0], 2 ** (levels - 1) * s0[1])
    _check_dfb(shape, levels)
    tree, steps = _plan(shape, levels)
    x = np.empty(shape)
    if levels == 1:
        for parity, band in enumerate(subbands):
            _quincunx_unpack(np.asarray(band, dtype=np.float64), x, parity)
    else:
        for leaf, band in zip(tree[-1], subbands):
            sl = _leaf_slices(leaf, levels)
            if x[sl].shape != np.shape(band):
                raise DimensionError(f"subband shape {np.shape(band)} != {x[sl].shape}")
            x[sl] = band
    for node, masks, scale in reversed(steps):
        x /= scale
        for coef, target in reversed(_LIFT_STEPS):
            x -= (0.5 * coef) * masks[target] * _neighbour_sum(x, node.a, node.b)
    return x


def subband_wedges(levels: int) -> list[tuple[bool, float, float]]:
    """(vertical, low slope, high slope) of each subband in output order."""
    out = []
    for leaf in _tree(levels)[-1]:
        half = 2.0 ** -(levels - 1) if levels > 1 else 1.0
        out.append((leaf.vertical, leaf.centre - half, leaf.centre + half))
    return out


# ---------------------------------------------------------------------------
# Full transform


def _dfb_tuple(dfb_levels, levels: int) -> tuple[int, ...]:
    if isinstance(dfb_levels, (int, np.integer)):
        return (int(dfb_levels),) * levels
    out = tuple(int(v) for v in dfb_levels)
    if len(out) != levels:
        raise ParameterError(f"need {levels} DFB levels, got {len(out)}")
    return out


def required_multiple(levels: int, dfb_levels) -> int:
    """Side lengths of a transformable plane must be multiples of this."""
    return 2 ** (levels + max(_dfb_tuple(dfb_levels, levels)))


def ct_forward(plane: np.ndarray, levels: int, dfb_levels=2, lowpass_map=None) -> CtRepr:
    """Contourlet decomposition; ``lowpass_map`` acts on the coarsest lowpass only."""
    if not 1 <= levels <= 4:
        raise ParameterError(f"pyramid levels must be in [1, 4], got {levels}")
    dfb = _dfb_tuple(dfb_levels, levels)
    for l in dfb:
        if not 1 <= l <= MAX_DFB_LEVELS:
            raise ParameterError(f"DFB levels must be in [1, {MAX_DFB_LEVELS}], got {l}")
    x = np.asarray(plane, dtype=np.float64)
    m = required_multiple(levels, dfb)
    if x.ndim != 2 or x.shape[0] % m or x.shape[1] % m:
        raise DimensionError(f"plane {x.shape} must have sides divisible by {m}")
    details = []
    low = x
    for i in range(levels):
        low, d = lp_analysis(low, lowpass_map if i == levels - 1 else None)
        details.append(d)
    details.reverse()
    scales = [dfb_analysis(d, l) for d, l in zip(details, dfb)]
    return CtRepr(lowpass=low, scales=scales, dfb_levels=dfb, shape=x.shape)


def ct_inverse(repr: CtRepr, decode_scales: int | None = None) -> np.ndarray:
    """Reconstruct using the lowpass and the ``decode_scales`` coarsest scales.

    The result has the size of the original plane divided by
    ``2 ** (levels - decode_scales)``.
    """
    k = repr.levels if decode_scales is None else decode_scales
    if not 0 <= k <= repr.levels:
        raise ParameterError(f"decode_scales must be in [0, {repr.levels}], got {k}")
    x = np.array(repr.lowpass, dtype=np.float64)
    for s in range(k):
        if s >= len(repr.scales) or not repr.scales[s]:
            raise DimensionError(f"subbands for scale {s} are missing")
        x = lp_synthesis(x, dfb_synthesis(repr.scales[s], repr.dfb_levels[s]))
    return x
