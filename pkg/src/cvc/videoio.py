"""Y4M (YUV4MPEG2, 4:2:0 only) and raw rgb24 readers and writers.

Readers accept any frame size; the encoder enforces its own minimum.

Y4M planes are converted with the BT.601 limited-range matrix; chroma is
treated as co-sited with the even luma samples and bilinearly upsampled.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .errors import FormatError
from .pixels import RgbFrame, upsample_plane

Y4M_MAGIC = b"YUV4MPEG2"
FRAME_MAGIC = b"FRAME"
CHROMA_420 = ("420jpeg", "420paldv", "420mpeg2", "420")


@dataclass
class Y4mHeader:
    width: int
    height: int
    fps_num: int = 15
    fps_den: int = 1
    interlace: str = "p"
    aspect: str = "1:1"
    chroma: str = "420jpeg"

    @property
    def fps(self) -> float:
        return self.fps_num / self.fps_den

    def encode(self) -> bytes:
        return (f"YUV4MPEG2 W{self.width} H{self.height} F{self.fps_num}:{self.fps_den} "
                f"I{self.interlace} A{self.aspect} C{self.chroma}\n").encode("ascii")


def parse_y4m_header(line: bytes | str) -> Y4mHeader:
    if isinstance(line, bytes):
        line = line.decode("ascii", errors="replace")
    tokens = line.strip().split()
    if not tokens or tokens[0] != Y4M_MAGIC.decode():
        raise FormatError("not a YUV4MPEG2 stream")
    fields = {}
    for tok in tokens[1:]:
        fields[tok[0]] = tok[1:]
    try:
        width, height = int(fields["W"]), int(fields["H"])
    except (KeyError, ValueError):
        raise FormatError(f"Y4M header lacks valid W/H: {line.strip()!r}") from None
    hdr = Y4mHeader(width, height)
    if "F" in fields:
        try:
            num, den = fields["F"].split(":")
            hdr.fps_num, hdr.fps_den = int(num), int(den)
        except ValueError:
            raise FormatError(f"bad frame rate {fields['F']!r}") from None
        if hdr.fps_num <= 0 or hdr.fps_den <= 0:
            raise FormatError(f"bad frame rate {fields['F']!r}")
    hdr.interlace = fields.get("I", hdr.interlace)
    hdr.aspect = fields.get("A", hdr.aspect)
    hdr.chroma = fields.get("C", hdr.chroma)
    if hdr.chroma not in CHROMA_420:
        raise FormatError(f"unsupported Y4M chroma tag C{hdr.chroma}")
    if width <= 0 or height <= 0:
        raise FormatError(f"bad frame size {width}x{height}")
    return hdr


def yuv420_to_rgb(y: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    shape = y.shape
    yf = (y.astype(np.float64) - 16.0) * (255.0 / 219.0)
    uf = upsample_plane(u.astype(np.float64) - 128.0, 2, shape) * (255.0 / 224.0)
    vf = upsample_plane(v.astype(np.float64) - 128.0, 2, shape) * (255.0 / 224.0)
    r = yf + 1.402 * vf
    g = yf - 0.344136 * uf - 0.714136 * vf
    b = yf + 1.772 * uf
    return np.clip(np.round(np.stack([r, g, b], axis=-1)), 0, 255).astype(np.uint8)


def rgb_to_yuv420(rgb: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    c = rgb.astype(np.float64)
    r, g, b = c[..., 0], c[..., 1], c[..., 2]
    y = 16.0 + (219.0 / 255.0) * (0.299 * r + 0.587 * g + 0.114 * b)
    u = 128.0 + (224.0 / 255.0) * (-0.168736 * r - 0.331264 * g + 0.5 * b)
    v = 128.0 + (224.0 / 255.0) * (0.5 * r - 0.418688 * g - 0.081312 * b)

    def q(p):
        return np.clip(np.round(p), 0, 255).astype(np.uint8)

    return q(y), q(u[::2, ::2]), q(v[::2, ::2])


def iter_y4m(path: str | os.PathLike) -> tuple[Y4mHeader, Iterator[RgbFrame]]:
    fh = open(path, "rb")
    header = parse_y4m_header(fh.readline())
    w, h = header.width, header.height
    cw, ch = (w + 1) // 2, (h + 1) // 2
    frame_size = w * h + 2 * cw * ch

    def frames():
        with fh:
            index = 0
            while True:
                marker = fh.readline()
                if not marker:
                    return
                if not marker.startswith(FRAME_MAGIC):
                    raise FormatError(f"expected FRAME marker at frame {index}")
                raw = fh.read(frame_size)
                if len(raw) != frame_size:
                    raise FormatError(f"truncated Y4M frame {index}")
                buf = np.frombuffer(raw, dtype=np.uint8)
                y = buf[:w * h].reshape(h, w)
                u = buf[w * h:w * h + cw * ch].reshape(ch, cw)
                v = buf[w * h + cw * ch:].reshape(ch, cw)
                yield RgbFrame(yuv420_to_rgb(y, u, v), index, min_side=1)
                index += 1

    return header, frames()


def read_y4m(path: str | os.PathLike) -> tuple[Y4mHeader, list[RgbFrame]]:
    header, frames = iter_y4m(path)
    return header, list(frames)


def write_y4m(path: str | os.PathLike, frames: Iterable[RgbFrame],
              fps_num: int = 15, fps_den: int = 1) -> int:
    count = 0
    with open(path, "wb") as fh:
        header = None
        for frame in frames:
            if header is None:
                header = Y4mHeader(frame.width, frame.height, fps_num, fps_den)
                fh.write(header.encode())
            elif (frame.width, frame.height) != (header.width, header.height):
                raise FormatError("all frames of a Y4M file must share one size")
            y, u, v = rgb_to_yuv420(frame.data)
            fh.write(FRAME_MAGIC + b"\n")
            fh.write(y.tobytes() + u.tobytes() + v.tobytes())
            count += 1
    return count


def read_rgb24(path: str | os.PathLike, width: int, height: int) -> list[RgbFrame]:
    if width <= 0 or height <= 0:
        raise FormatError("rgb24 input needs explicit positive --width and --height")
    raw = open(path, "rb").read()
    size = width * height * 3
    if len(raw) % size:
        raise FormatError(f"rgb24 file length {len(raw)} is not a multiple of "
                          f"{width}x{height}x3 (truncated frame)")
    return [RgbFrame.from_bytes(raw[i:i + size], width, height, i // size, min_side=1)
            for i in range(0, len(raw), size)]


def write_rgb24(path: str | os.PathLike, frames: Iterable[RgbFrame]) -> int:
    count = 0
    with open(path, "wb") as fh:
        for frame in frames:
            fh.write(frame.tobytes())
            count += 1
    return count
