"""The .cvc container: a global header followed by frame records.

Layout (all multi-byte fields little-endian)::

    header   "CVC1" | version u8 | mode u8 | width u16 | height u16
             | fps_num u16 | fps_den u16 | levels u8 | dfb_levels u8 x levels
             | chroma_n u8 | gop u16 | search_w u8
    frame    frame_type u8 | qph u8 | qpl u8 | section_count u16 | sections
    section  channel u8 | scale u8 | subband u8 | rows u16 | cols u16
             | raw_len u32 | comp_len u32 | payload (comp_len bytes)

Channels 0-2 are Y, Co, Cg; 0xFE is the motion-vector section and 0xFD
the joint DEFLATE payload of an NTS frame.  In NTS frames the component
sections carry only their descriptors (comp_len 0); their raw bytes are
consecutive slices of the inflated joint payload, in section order.
Scale 0xFF marks a lowpass section; other scales count from 0 = coarsest.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, Iterator

from .errors import StreamError

MAGIC = b"CVC1"
VERSION = 1
MODES = ("scalable", "nts")
K_FRAME, P_FRAME = 0, 1

CHANNEL_Y, CHANNEL_CO, CHANNEL_CG = 0, 1, 2
CHANNEL_JOINT = 0xFD
CHANNEL_MV = 0xFE
SCALE_LOWPASS = 0xFF

_HEAD = struct.Struct("<4sBBHHHHB")
_TAIL = struct.Struct("<BHB")
_FRAME = struct.Struct("<BBBH")
_SECTION = struct.Struct("<BBBHHII")


class UnsupportedOperation(StreamError):
    """The operation is not available for this stream's mode."""


@dataclass
class StreamHeader:
    width: int
    height: int
    fps_num: int = 15
    fps_den: int = 1
    levels: int = 2
    dfb_levels: tuple[int, ...] = (2, 2)
    chroma_n: int = 4
    gop: int = 10
    search_w: int = 8
    mode: str = "scalable"
    version: int = VERSION

    def __post_init__(self):
        self.dfb_levels = tuple(int(v) for v in self.dfb_levels)
        self.validate()

    def validate(self) -> None:
        if self.mode not in MODES:
            raise StreamError(f"unknown mode {self.mode!r}")
        if not 1 <= self.levels <= 4 or len(self.dfb_levels) != self.levels:
            raise StreamError(f"bad pyramid levels {self.levels} / {self.dfb_levels}")
        if any(not 1 <= v <= 4 for v in self.dfb_levels):
            raise StreamError(f"bad DFB levels {self.dfb_levels}")
        if self.chroma_n not in (1, 2, 4, 8):
            raise StreamError(f"bad chroma factor {self.chroma_n}")
        if self.width < 16 or self.height < 16 or self.gop < 1:
            raise StreamError("bad geometry or GOP")
        if self.fps_num < 1 or self.fps_den < 1:
            raise StreamError("bad frame rate")

    def pack(self) -> bytes:
        return (_HEAD.pack(MAGIC, self.version, MODES.index(self.mode), self.width, self.height,
                           self.fps_num, self.fps_den, self.levels)
                + bytes(self.dfb_levels)
                + _TAIL.pack(self.chroma_n, self.gop, self.search_w))

    @classmethod
    def read(cls, fh: BinaryIO) -> StreamHeader:
        raw = fh.read(_HEAD.size)
        if len(raw) < 4 or raw[:4] != MAGIC:
            raise StreamError("not a CVC stream (bad magic)")
        if len(raw) != _HEAD.size:
            raise StreamError("truncated stream header")
        magic, version, mode, w, h, fn, fd, levels = _HEAD.unpack(raw)
        if version != VERSION:
            raise StreamError(f"unsupported stream version {version}")
        if mode >= len(MODES):
            raise StreamError(f"unknown mode code {mode}")
        rest = fh.read(levels + _TAIL.size)
        if len(rest) != levels + _TAIL.size:
            raise StreamError("truncated stream header")
        chroma_n, gop, search_w = _TAIL.unpack(rest[levels:])
        return cls(w, h, fn, fd, levels, tuple(rest[:levels]), chroma_n, gop, search_w,
                   MODES[mode], version)

    @property
    def size(self) -> int:
        return _HEAD.size + self.levels + _TAIL.size


@dataclass
class Section:
    channel: int
    scale: int
    subband: int
    rows: int
    cols: int
    raw_len: int
    payload: bytes = b""

    @property
    def comp_len(self) -> int:
        return len(self.payload)

    @property
    def key(self) -> tuple[int, int, int]:
        return (self.channel, self.scale, self.subband)

    @property
    def is_component(self) -> bool:
        return self.channel in (CHANNEL_Y, CHANNEL_CO, CHANNEL_CG)

    def pack(self) -> bytes:
        return _SECTION.pack(self.channel, self.scale, self.subband, self.rows, self.cols,
                             self.raw_len, self.comp_len) + self.payload


@dataclass
class FrameRecord:
    frame_type: int
    qph: int
    qpl: int
    sections: list[Section] = field(default_factory=list)

    @property
    def is_key(self) -> bool:
        return self.frame_type == K_FRAME

    def pack(self) -> bytes:
        head = _FRAME.pack(self.frame_type, self.qph, self.qpl, len(self.sections))
        return head + b"".join(s.pack() for s in self.sections)

    @property
    def size(self) -> int:
        return _FRAME.size + sum(_SECTION.size + s.comp_len for s in self.sections)

    @property
    def payload_size(self) -> int:
        return sum(s.comp_len for s in self.sections)

    @classmethod
    def read(cls, fh: BinaryIO) -> FrameRecord | None:
        raw = fh.read(_FRAME.size)
        if not raw:
            return None
        if len(raw) != _FRAME.size:
            raise StreamError("truncated frame record header")
        ftype, qph, qpl, count = _FRAME.unpack(raw)
        if ftype not in (K_FRAME, P_FRAME):
            raise StreamError(f"bad frame type {ftype}")
        rec = cls(ftype, qph, qpl)
        for _ in range(count):
            head = fh.read(_SECTION.size)
            if len(head) != _SECTION.size:
                raise StreamError("truncated section header")
            ch, sc, sb, rows, cols, raw_len, comp_len = _SECTION.unpack(head)
            payload = fh.read(comp_len)
            if len(payload) != comp_len:
                raise StreamError("truncated section payload")
            rec.sections.append(Section(ch, sc, sb, rows, cols, raw_len, payload))
        return rec


def write_stream(header: StreamHeader, records: Iterable[FrameRecord], sink: BinaryIO) -> int:
    n = sink.write(header.pack())
    for rec in records:
        n += sink.write(rec.pack())
    return n


def _source(source) -> BinaryIO:
    if isinstance(source, (bytes, bytearray, memoryview)):
        return io.BytesIO(bytes(source))
    return source


def read_stream(source) -> tuple[StreamHeader, Iterator[FrameRecord]]:
    fh = _source(source)
    header = StreamHeader.read(fh)

    def records():
        while True:
            rec = FrameRecord.read(fh)
            if rec is None:
                return
            yield rec

    return header, records()


def stream_bytes(header: StreamHeader, records: Iterable[FrameRecord]) -> bytes:
    buf = io.BytesIO()
    write_stream(header, records, buf)
    return buf.getvalue()


def truncate_records(header: StreamHeader, records: Iterable[FrameRecord],
                     keep_scales: int) -> Iterator[FrameRecord]:
    if header.mode != "scalable":
        raise UnsupportedOperation("NTS streams cannot be truncated; decode at a reduced scale instead")
    if not 0 <= keep_scales <= header.levels:
        raise StreamError(f"keep_scales must be in [0, {header.levels}], got {keep_scales}")
    for rec in records:
        kept = [s for s in rec.sections
                if not s.is_component or s.scale == SCALE_LOWPASS or s.scale < keep_scales]
        yield FrameRecord(rec.frame_type, rec.qph, rec.qpl, kept)


def truncate_to_scale(source, keep_scales: int) -> bytes:
    """Drop every section finer than ``keep_scales`` without re-encoding."""
    header, records = read_stream(source)
    if header.mode != "scalable":
        raise UnsupportedOperation("NTS streams cannot be truncated; decode at a reduced scale instead")
    return stream_bytes(header, truncate_records(header, records, keep_scales))
