"""Encoder and decoder pipelines over quantized contourlet components.

Prediction runs in the quantized domain: a P-frame carries the wrapped
difference between each quantized component and its motion-compensated
counterpart from the previous frame.  The encoder keeps exactly the
quantized components the decoder will rebuild, so the two never drift.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

import numpy as np

from . import bitstream as bs
from .contourlet import CtRepr, _dfb_tuple, ct_forward, ct_inverse
from .entropy import (column_filter, column_unfilter, deflate, inflate, reconstruct, residual,
                      rle_decode, rle_encode)
from .errors import DimensionError, ParameterError, StreamError
from .motion import BLOCK, Component, MotionField, estimate_motion, motion_compensate
from .pixels import (CHROMA_FACTORS, MIN_SIDE, RgbFrame, YcocgFrame, rgb_to_ycocg, subsample_chroma,
                     upsample_plane, ycocg_to_rgb)
from .quant import QuantParams, dequantize, normalize_lowpass, quantize

CHANNELS = (bs.CHANNEL_Y, bs.CHANNEL_CO, bs.CHANNEL_CG)


@dataclass
class EncoderConfig:
    """Codec parameters.  ``qpl=None`` selects max(1, qph // 14)."""

    qph: int = 14
    qpl: int | None = None
    levels: int = 2
    dfb_levels: int | tuple[int, ...] = 2
    chroma_n: int = 4
    gop: int = 10
    search_w: int = 8
    mode: str = "scalable"

    def __post_init__(self):
        if not 1 <= self.levels <= 4:
            raise ParameterError(f"levels must be in [1, 4], got {self.levels}")
        self.dfb_levels = _dfb_tuple(self.dfb_levels, self.levels)
        if any(not 1 <= l <= 4 for l in self.dfb_levels):
            raise ParameterError(f"DFB levels must be in [1, 4], got {self.dfb_levels}")
        if self.chroma_n not in CHROMA_FACTORS:
            raise ParameterError(f"chroma factor must be one of {CHROMA_FACTORS}, got {self.chroma_n}")
        if not 1 <= self.gop <= 0xFFFF:
            raise ParameterError(f"gop must be in [1, 65535], got {self.gop}")
        if not 0 <= self.search_w <= 127:
            raise ParameterError(f"search range must be in [0, 127], got {self.search_w}")
        if self.mode not in bs.MODES:
            raise ParameterError(f"mode must be one of {bs.MODES}, got {self.mode!r}")
        self.quant  # range checks

    @property
    def quant(self) -> QuantParams:
        if self.qpl is None:
            return QuantParams.auto(self.qph)
        return QuantParams(self.qph, self.qpl)

    def header(self, width: int, height: int, fps_num: int = 15, fps_den: int = 1) -> bs.StreamHeader:
        return bs.StreamHeader(width, height, fps_num, fps_den, self.levels, self.dfb_levels,
                               self.chroma_n, self.gop, self.search_w, self.mode)

    @classmethod
    def from_header(cls, header: bs.StreamHeader, qph: int = 14, qpl: int | None = None) -> EncoderConfig:
        return cls(qph, qpl, header.levels, header.dfb_levels, header.chroma_n, header.gop,
                   header.search_w, header.mode)


# ---------------------------------------------------------------------------
# Geometry


def plane_multiple(levels: int, max_dfb: int, block: int = 1) -> int:
    m = 2 ** (levels + max_dfb)
    return m * block // math.gcd(m, block)


def pad_plane(plane: np.ndarray, levels: int, max_dfb: int, block: int = 1) -> np.ndarray:
    """Replicate-pad the bottom and right edges to the transform multiple."""
    m = plane_multiple(levels, max_dfb, block)
    h, w = plane.shape
    return np.pad(plane, ((0, -h % m), (0, -w % m)), mode="edge")


def crop(plane: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    return plane[:dims[0], :dims[1]]


@dataclass(frozen=True)
class Geometry:
    """Padded channel sizes for one stream."""

    height: int
    width: int
    levels: int
    dfb_levels: tuple[int, ...]
    chroma_n: int

    @classmethod
    def of(cls, header: bs.StreamHeader) -> Geometry:
        return cls(header.height, header.width, header.levels, tuple(header.dfb_levels), header.chroma_n)

    def _padded(self, h: int, w: int, block: int) -> tuple[int, int]:
        m = plane_multiple(self.levels, max(self.dfb_levels), block)
        return (-(-h // m) * m, -(-w // m) * m)

    @property
    def luma(self) -> tuple[int, int]:
        return self._padded(self.height, self.width, BLOCK)

    @property
    def chroma(self) -> tuple[int, int]:
        n = self.chroma_n
        return self._padded(-(-self.height // n), -(-self.width // n), 1)

    def channel(self, ch: int) -> tuple[int, int]:
        return self.luma if ch == bs.CHANNEL_Y else self.chroma

    def factor(self, ch: int) -> int:
        return 1 if ch == bs.CHANNEL_Y else self.chroma_n

    @property
    def blocks(self) -> tuple[int, int]:
        h, w = self.luma
        return (h // BLOCK, w // BLOCK)

    def lowpass_shape(self, ch: int) -> tuple[int, int]:
        h, w = self.channel(ch)
        f = 2 ** self.levels
        return (h // f, w // f)

    def output_shape(self, decode_scales: int) -> tuple[int, int]:
        f = 2 ** (self.levels - decode_scales)
        return (-(-self.height // f), -(-self.width // f))


# ---------------------------------------------------------------------------
# State


@dataclass
class ReferenceState:
    """What both ends know about the previous frame.

    ``components[c]`` is channel c's quantized representation (uint8
    lowpass, int8 subbands).  ``luma`` is the padded input luma the
    encoder searches against; decoders leave it unset.
    """

    components: list[CtRepr] | None = None
    luma: np.ndarray | None = None
    frame_index: int = 0

    @property
    def ready(self) -> bool:
        return self.components is not None

    def same_components(self, other: ReferenceState) -> bool:
        if not (self.ready and other.ready):
            return False
        for a, b in zip(self.components, other.components):
            if not np.array_equal(a.lowpass, b.lowpass) or len(a.scales) != len(b.scales):
                return False
            for sa, sb in zip(a.scales, b.scales):
                if len(sa) != len(sb) or not all(np.array_equal(x, y) for x, y in zip(sa, sb)):
                    return False
        return True


def _component_planes(rep: CtRepr) -> Iterator[tuple[int, int, np.ndarray]]:
    yield bs.SCALE_LOWPASS, 0, rep.lowpass
    for s, bands in enumerate(rep.scales):
        for b, band in enumerate(bands):
            yield s, b, band


def _descriptor(geo: Geometry, ch: int, shape: tuple[int, int]) -> Component:
    return Component.of(shape, geo.channel(ch), geo.factor(ch))


# ---------------------------------------------------------------------------
# Encoder


def _planes(frame: RgbFrame, geo: Geometry) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    yc = subsample_chroma(rgb_to_ycocg(frame), geo.chroma_n)
    mdfb = max(geo.dfb_levels)
    return (pad_plane(yc.y, geo.levels, mdfb, BLOCK),
            pad_plane(yc.co, geo.levels, mdfb),
            pad_plane(yc.cg, geo.levels, mdfb))


def quantize_repr(rep: CtRepr, qp: QuantParams) -> CtRepr:
    return CtRepr(
        lowpass=quantize(normalize_lowpass(rep.lowpass), qp.qpl, "lowpass"),
        scales=[[quantize(b, qp.qph, "directional") for b in sc] for sc in rep.scales],
        dfb_levels=rep.dfb_levels,
        shape=rep.shape,
    )


def dequantize_repr(rep: CtRepr, qph: int, qpl: int) -> CtRepr:
    return CtRepr(
        lowpass=dequantize(rep.lowpass, qpl),
        scales=[[dequantize(b, qph) for b in sc] for sc in rep.scales],
        dfb_levels=rep.dfb_levels,
        shape=rep.shape,
    )


def _pack_sections(raw: list[tuple[bs.Section, bytes]], mode: str) -> list[bs.Section]:
    if mode == "scalable":
        for sec, data in raw:
            sec.payload = deflate(data)
        return [sec for sec, _ in raw]
    joint = b"".join(data for _, data in raw)
    sections = [sec for sec, _ in raw]
    sections.append(bs.Section(bs.CHANNEL_JOINT, 0, 0, 0, 0, len(joint), deflate(joint)))
    return sections


def encode_frame(frame: RgbFrame, state: ReferenceState, config: EncoderConfig,
                 header: bs.StreamHeader) -> tuple[bs.FrameRecord, ReferenceState]:
    """Encode one frame; returns the record and the state after it."""
    if min(frame.width, frame.height) < MIN_SIDE:
        raise DimensionError(f"frames must be at least {MIN_SIDE}x{MIN_SIDE}, got "
                             f"{frame.width}x{frame.height}")
    if (frame.width, frame.height) != (header.width, header.height):
        raise DimensionError(f"frame is {frame.width}x{frame.height}, stream is "
                             f"{header.width}x{header.height}")
    geo = Geometry.of(header)
    qp = config.quant
    index = state.frame_index
    key = index % header.gop == 0 or not state.ready
    planes = _planes(frame, geo)
    comps = [quantize_repr(ct_forward(p, geo.levels, geo.dfb_levels, normalize_lowpass), qp)
             for p in planes]

    raw: list[tuple[bs.Section, bytes]] = []
    if key:
        for ch, rep in zip(CHANNELS, comps):
            for s, b, q in _component_planes(rep):
                data = column_filter(q).tobytes() if s == bs.SCALE_LOWPASS else rle_encode(q)
                raw.append((bs.Section(ch, s, b, *q.shape, len(data)), data))
    else:
        field = estimate_motion(planes[0], state.luma, header.search_w)
        mv = field.to_bytes()
        raw.append((bs.Section(bs.CHANNEL_MV, 0, 0, *field.grid, len(mv)), mv))
        for ch, rep, prev in zip(CHANNELS, comps, state.components):
            for (s, b, q), (_, _, ref) in zip(_component_planes(rep), _component_planes(prev)):
                pred = motion_compensate(ref, field, _descriptor(geo, ch, q.shape))
                res = residual(q, pred)
                if not res.any():
                    continue  # skipped: an absent P section means a zero residual
                data = rle_encode(res)
                raw.append((bs.Section(ch, s, b, *q.shape, len(data)), data))

    record = bs.FrameRecord(bs.K_FRAME if key else bs.P_FRAME, qp.qph, qp.qpl,
                            _pack_sections(raw, header.mode))
    return record, ReferenceState(comps, planes[0], index + 1)


class Encoder:
    """Stateful frame-by-frame encoder for one stream."""

    def __init__(self, config: EncoderConfig, width: int, height: int,
                 fps_num: int = 15, fps_den: int = 1):
        if min(width, height) < MIN_SIDE:
            raise DimensionError(f"frames must be at least {MIN_SIDE}x{MIN_SIDE}, got {width}x{height}")
        self.config = config
        self.header = config.header(width, height, fps_num, fps_den)
        self.state = ReferenceState()

    def encode(self, frame: RgbFrame) -> bs.FrameRecord:
        record, self.state = encode_frame(frame, self.state, self.config, self.header)
        return record


def encode_video(frames: Iterable[RgbFrame], config: EncoderConfig,
                 fps_num: int = 15, fps_den: int = 1) -> bytes:
    frames = iter(frames)
    try:
        first = next(frames)
    except StopIteration:
        raise ParameterError("cannot encode an empty clip") from None
    enc = Encoder(config, first.width, first.height, fps_num, fps_den)
    buf = io.BytesIO()
    buf.write(enc.header.pack())
    buf.write(enc.encode(first).pack())
    for frame in frames:
        buf.write(enc.encode(frame).pack())
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Decoder


def available_scales(record: bs.FrameRecord, levels: int) -> int:
    """Number of coarse scales whose luma sections are present in a K-frame."""
    present = {s.scale for s in record.sections if s.channel == bs.CHANNEL_Y}
    k = 0
    while k < levels and k in present:
        k += 1
    return k


def _raw_sections(record: bs.FrameRecord, mode: str, wanted) -> dict[tuple[int, int, int], tuple[bs.Section, bytes]]:
    if mode == "scalable":
        return {s.key: (s, inflate(s.payload, s.raw_len)) for s in record.sections if wanted(s)}
    joints = [s for s in record.sections if s.channel == bs.CHANNEL_JOINT]
    if len(joints) != 1:
        raise StreamError("NTS frame must carry exactly one joint section")
    parts = [s for s in record.sections if s.channel != bs.CHANNEL_JOINT]
    joint = inflate(joints[0].payload, sum(s.raw_len for s in parts))
    out, pos = {}, 0
    for s in parts:
        if wanted(s):
            out[s.key] = (s, joint[pos:pos + s.raw_len])
        pos += s.raw_len
    return out


@lru_cache(maxsize=64)
def _expected_shapes(geo: Geometry, ch: int, k: int) -> list[tuple[int, int, tuple[int, int]]]:
    """(scale, subband, shape) for the lowpass and the k coarsest scales."""
    probe = ct_forward(np.zeros(geo.channel(ch)), geo.levels, geo.dfb_levels)
    return [(s, b, q.shape) for s, b, q in _component_planes(probe) if s == bs.SCALE_LOWPASS or s < k]


def decode_components(record: bs.FrameRecord, state: ReferenceState, header: bs.StreamHeader,
                      decode_scales: int) -> ReferenceState:
    """Rebuild the quantized components of one frame (first ``decode_scales`` scales)."""
    geo = Geometry.of(header)
    key = record.frame_type == bs.K_FRAME
    if not key and not state.ready:
        raise StreamError("P-frame without a preceding K-frame")
    k = decode_scales

    def wanted(s: bs.Section) -> bool:
        return s.channel == bs.CHANNEL_MV or (s.is_component and (s.scale == bs.SCALE_LOWPASS or s.scale < k))

    raw = _raw_sections(record, header.mode, wanted)
    field = None
    if not key:
        if (bs.CHANNEL_MV, 0, 0) not in raw:
            raise StreamError("P-frame lacks its motion-vector section")
        sec, data = raw[(bs.CHANNEL_MV, 0, 0)]
        if (sec.rows, sec.cols) != geo.blocks:
            raise StreamError("motion-vector grid does not match the frame size")
        field = MotionField.from_bytes(data, sec.rows, sec.cols)

    comps = []
    for ci, ch in enumerate(CHANNELS):
        prev = None if key else dict(((s, b), q) for s, b, q in _component_planes(state.components[ci]))
        lowpass, scales = None, [[] for _ in range(k)]
        for s, b, shape in _expected_shapes(geo, ch, k):
            lowband = s == bs.SCALE_LOWPASS
            if (ch, s, b) not in raw:
                if key:
                    raise StreamError(f"missing section channel={ch} scale={s} subband={b}")
                if (s, b) not in prev:
                    raise StreamError("reference state lacks a component needed by this P-frame")
                q = motion_compensate(prev[(s, b)], field, _descriptor(geo, ch, shape))
                if lowband:
                    lowpass = q
                else:
                    scales[s].append(q)
                continue
            sec, data = raw[(ch, s, b)]
            if (sec.rows, sec.cols) != shape:
                raise StreamError(f"section {sec.key} is {sec.rows}x{sec.cols}, expected {shape}")
            if key and lowband:
                if len(data) != shape[0] * shape[1]:
                    raise StreamError("lowpass section has the wrong length")
                q = column_unfilter(np.frombuffer(data, dtype=np.uint8).reshape(shape))
            else:
                q = rle_decode(data, shape[0] * shape[1]).reshape(shape)
                if not key:
                    if (s, b) not in prev:
                        raise StreamError("reference state lacks a component needed by this P-frame")
                    ref = prev[(s, b)]
                    q = reconstruct(q, motion_compensate(ref, field, _descriptor(geo, ch, shape)))
            if lowband:
                lowpass = q
            else:
                scales[s].append(q.view(np.int8))
        comps.append(CtRepr(lowpass, scales, tuple(geo.dfb_levels), geo.channel(ch)))
    return ReferenceState(comps, None, state.frame_index + 1)


def render(state: ReferenceState, header: bs.StreamHeader, qph: int, qpl: int,
           decode_scales: int, index: int = 0) -> RgbFrame:
    """Turn quantized components into an RGB frame at the requested scale."""
    geo = Geometry.of(header)
    y, co, cg = (ct_inverse(dequantize_repr(c, qph, qpl), decode_scales) for c in state.components)
    out = geo.output_shape(decode_scales)
    grid = y.shape
    co = upsample_plane(co, geo.chroma_n, grid)
    cg = upsample_plane(cg, geo.chroma_n, grid)
    yc = YcocgFrame(crop(y, out), crop(co, out), crop(cg, out), 1)
    return ycocg_to_rgb(yc, index, min_side=1)


def decode_frame(record: bs.FrameRecord, state: ReferenceState, header: bs.StreamHeader,
                 decode_scales: int | None = None) -> tuple[RgbFrame, ReferenceState]:
    if record.frame_type == bs.K_FRAME:
        avail = available_scales(record, header.levels)
    elif state.ready:
        avail = len(state.components[0].scales)
    else:
        raise StreamError("P-frame without a preceding K-frame")
    k = avail if decode_scales is None else decode_scales
    if not 0 <= k <= header.levels:
        raise ParameterError(f"scale must be in [0, {header.levels}], got {k}")
    if k > avail:
        raise StreamError(f"stream carries {avail} scales, {k} requested")
    new = decode_components(record, state, header, k)
    return render(new, header, record.qph, record.qpl, k, state.frame_index), new


class Decoder:
    """Stateful decoder.  ``scale=None`` decodes every scale the stream carries."""

    def __init__(self, header: bs.StreamHeader, scale: int | None = None):
        self.header = header
        self.scale = scale
        self.state = ReferenceState()

    def decode(self, record: bs.FrameRecord) -> RgbFrame:
        if self.scale is None:
            self.scale = available_scales(record, self.header.levels)
        frame, self.state = decode_frame(record, self.state, self.header, self.scale)
        return frame


def iter_decode(source, scale: int | None = None) -> tuple[bs.StreamHeader, Iterator[RgbFrame]]:
    header, records = bs.read_stream(source)
    dec = Decoder(header, scale)
    return header, (dec.decode(r) for r in records)


def decode_video(source, scale: int | None = None) -> tuple[bs.StreamHeader, list[RgbFrame]]:
    header, frames = iter_decode(source, scale)
    return header, list(frames)
