"""Command-line frontend: encode, decode, info, psnr and rd-sweep.

Exit codes: 0 success, 2 usage or parameter error, 3 input format error,
4 corrupt or inconsistent stream.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import bitstream as bs
from .codec import EncoderConfig, decode_video, encode_video
from .errors import DimensionError, FormatError, ParameterError, StreamError
from .metrics import clip_y_psnr, format_db, mean_db
from .pixels import RgbFrame
from .quant import QPH_RANGE, QPL_RANGE
from .videoio import read_rgb24, read_y4m, write_rgb24, write_y4m

EXIT_OK, EXIT_USAGE, EXIT_FORMAT, EXIT_STREAM = 0, 2, 3, 4


# ---------------------------------------------------------------------------
# Argument types


def _int_in(name: str, lo: int, hi: int):
    def parse(text: str) -> int:
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer, got {text!r}") from None
        if not lo <= v <= hi:
            raise argparse.ArgumentTypeError(f"{name} must be in [{lo}, {hi}], got {v}")
        return v
    return parse


def _qpl(text: str):
    if text == "auto":
        return None
    return _int_in("QPL", *QPL_RANGE)(text)


def _dfb(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"--dfb takes integers like 2 or 2,3; got {text!r}") from None
    if any(not 1 <= v <= 4 for v in vals):
        raise argparse.ArgumentTypeError(f"DFB levels must be in [1, 4], got {text!r}")
    return vals


def _fps(text: str) -> Fraction:
    try:
        f = Fraction(text.replace(":", "/"))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad frame rate {text!r}") from None
    if f <= 0:
        raise argparse.ArgumentTypeError(f"frame rate must be positive, got {text!r}")
    return f.limit_denominator(0xFFFF)


def _qph_list(text: str) -> list[int]:
    parse = _int_in("QPH", *QPH_RANGE)
    items = [t for t in text.split(",") if t.strip()]
    if not items:
        raise argparse.ArgumentTypeError("--qph-list needs at least one value")
    return [parse(t.strip()) for t in items]


# ---------------------------------------------------------------------------
# File helpers


def _guess_format(path: str, given: str | None) -> str:
    if given:
        return given
    return "y4m" if str(path).lower().endswith(".y4m") else "rgb24"


def _read_video(path, fmt, width=None, height=None) -> tuple[list[RgbFrame], Fraction]:
    fmt = _guess_format(path, fmt)
    if fmt == "y4m":
        header, frames = read_y4m(path)
        fps = Fraction(header.fps_num, header.fps_den)
    else:
        if not width or not height:
            raise FormatError("rgb24 input needs --width and --height")
        frames = read_rgb24(path, width, height)
        fps = None
    if not frames:
        raise FormatError(f"{path} holds no frames")
    return frames, fps


def _write_video(path, fmt, frames, fps: Fraction) -> None:
    if _guess_format(path, fmt) == "y4m":
        write_y4m(path, frames, fps.numerator, fps.denominator)
    else:
        write_rgb24(path, frames)


def _config(args) -> EncoderConfig:
    levels = args.levels
    dfb = args.dfb if len(args.dfb) != 1 else args.dfb * levels
    if len(dfb) != levels:
        raise ParameterError(f"--dfb lists {len(dfb)} values for {levels} levels")
    return EncoderConfig(qph=args.qph, qpl=args.qpl, levels=levels, dfb_levels=dfb,
                         chroma_n=args.chroma_n, gop=args.gop, search_w=args.search_w, mode=args.mode)


def _input_fps(args, fps: Fraction | None) -> Fraction:
    if fps is None:
        fps = args.fps if args.fps is not None else Fraction(15)
    return fps


# ---------------------------------------------------------------------------
# Commands


def cmd_encode(args, out) -> int:
    config = _config(args)
    frames, fps = _read_video(args.input, args.format, args.width, args.height)
    fps = _input_fps(args, fps)
    data = encode_video(frames, config, fps.numerator, fps.denominator)
    Path(args.output).write_bytes(data)
    q = config.quant
    print(f"encoded {len(frames)} frames {frames[0].width}x{frames[0].height} qph={q.qph} qpl={q.qpl} "
          f"-> {len(data)} bytes ({len(data) * 8 / len(frames) / 1000:.3f} kbit/frame)", file=out)
    return EXIT_OK


def cmd_decode(args, out) -> int:
    data = Path(args.input).read_bytes()
    header, _ = bs.read_stream(data)
    if args.scale is not None and not 0 <= args.scale <= header.levels:
        raise ParameterError(f"--scale must be in [0, {header.levels}], got {args.scale}")
    header, frames = decode_video(data, args.scale)
    _write_video(args.output, args.format, frames, Fraction(header.fps_num, header.fps_den))
    if frames:
        print(f"decoded {len(frames)} frames at {frames[0].width}x{frames[0].height}", file=out)
    return EXIT_OK


def cmd_info(args, out) -> int:
    data = Path(args.input).read_bytes()
    header, records = bs.read_stream(data)
    print(f"CVC stream version {header.version}, mode {header.mode}", file=out)
    print(f"size {header.width}x{header.height} @ {header.fps_num}/{header.fps_den} fps", file=out)
    print(f"levels {header.levels}, dfb {','.join(map(str, header.dfb_levels))}, chroma N={header.chroma_n}, "
          f"gop {header.gop}, search W={header.search_w}", file=out)
    print(f"{'frame':>5} {'type':>4} {'qph':>4} {'qpl':>4} {'sections':>8} {'payload':>8} {'bytes':>8}", file=out)
    total = header.size
    payload = 0
    count = 0
    for i, rec in enumerate(records):
        kind = "K" if rec.is_key else "P"
        print(f"{i:>5} {kind:>4} {rec.qph:>4} {rec.qpl:>4} {len(rec.sections):>8} "
              f"{rec.payload_size:>8} {rec.size:>8}", file=out)
        total += rec.size
        payload += rec.payload_size
        count += 1
    if total != len(data):
        raise StreamError(f"records account for {total} bytes but the file holds {len(data)}")
    print(f"frames {count}, file {len(data)} bytes, payload {payload} bytes, "
          f"headers {len(data) - payload} bytes", file=out)
    return EXIT_OK


def cmd_psnr(args, out) -> int:
    ref, _ = _read_video(args.ref, args.format, args.width, args.height)
    test, _ = _read_video(args.test, args.format, args.width, args.height)
    values = clip_y_psnr(ref, test)
    for i, v in enumerate(values):
        print(f"frame {i}: {format_db(v)} dB", file=out)
    print(f"mean Y-PSNR: {format_db(mean_db(values))} dB", file=out)
    return EXIT_OK


def rd_point(frames: Sequence[RgbFrame], config: EncoderConfig, fps: Fraction) -> tuple[float, float]:
    """(kbit per frame, mean Y-PSNR) of one encode/decode pass."""
    data = encode_video(frames, config, fps.numerator, fps.denominator)
    _, decoded = decode_video(data)
    return len(data) * 8 / len(frames) / 1000, mean_db(clip_y_psnr(frames, decoded))


def cmd_rd_sweep(args, out) -> int:
    frames, fps = _read_video(args.input, args.format, args.width, args.height)
    fps = _input_fps(args, fps)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["qph", "qpl", "kbit_per_frame", "y_psnr_db"])
    for qph in args.qph_list:
        args.qph, args.qpl = qph, None
        config = _config(args)
        kbit, db = rd_point(frames, config, fps)
        writer.writerow([qph, config.quant.qpl, f"{kbit:.4f}", format_db(db)])
    if args.csv and args.csv != "-":
        Path(args.csv).write_text(buf.getvalue())
    print(buf.getvalue(), end="", file=out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def _add_input(p, flag="--input"):
    p.add_argument(flag, required=True, help="input video (.y4m or raw rgb24)")


def _add_geometry(p):
    p.add_argument("--format", choices=("y4m", "rgb24"), help="default: from the file extension")
    p.add_argument("--width", type=int, help="rgb24 frame width")
    p.add_argument("--height", type=int, help="rgb24 frame height")


def _add_codec(p, with_qph=True):
    if with_qph:
        p.add_argument("--qph", type=_int_in("QPH", *QPH_RANGE), default=14,
                       help=f"directional step, [{QPH_RANGE[0]}, {QPH_RANGE[1]}]")
        p.add_argument("--qpl", type=_qpl, default=None,
                       help=f"lowpass step in [{QPL_RANGE[0]}, {QPL_RANGE[1]}] or 'auto' (max(1, qph//14))")
    p.add_argument("--fps", type=_fps, help="rgb24 frame rate, e.g. 15 or 30000/1001")
    p.add_argument("--levels", type=_int_in("levels", 1, 4), default=2)
    p.add_argument("--dfb", type=_dfb, default=(2,), help="directional levels per scale, e.g. 2 or 2,3")
    p.add_argument("--chroma-n", type=int, choices=(1, 2, 4, 8), default=4)
    p.add_argument("--gop", type=_int_in("gop", 1, 0xFFFF), default=10)
    p.add_argument("--search-w", type=_int_in("search-w", 0, 127), default=8)
    p.add_argument("--mode", choices=bs.MODES, default="scalable")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cvc", description="Contourlet video codec")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="encode a video into a .cvc stream")
    _add_input(p)
    _add_geometry(p)
    _add_codec(p)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decode a .cvc stream")
    _add_input(p)
    p.add_argument("--scale", type=int, help="number of detail scales to decode (default: all present)")
    p.add_argument("--format", choices=("y4m", "rgb24"))
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("info", help="print the header and a per-frame section table")
    _add_input(p)
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("psnr", help="per-frame and mean Y-PSNR between two videos")
    p.add_argument("--ref", required=True)
    p.add_argument("--test", required=True)
    _add_geometry(p)
    p.set_defaults(func=cmd_psnr)

    p = sub.add_parser("rd-sweep", help="encode/decode at several QPH values and emit CSV")
    _add_input(p)
    _add_geometry(p)
    _add_codec(p, with_qph=False)
    p.add_argument("--qph-list", type=_qph_list, required=True, help="comma-separated QPH values")
    p.add_argument("--csv", help="CSV output path (also printed to stdout)")
    p.set_defaults(func=cmd_rd_sweep)
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except ParameterError as exc:
        print(f"cvc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, DimensionError, OSError) as exc:
        print(f"cvc: error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except StreamError as exc:
        print(f"cvc: error: {exc}", file=sys.stderr)
        return EXIT_STREAM


if __name__ == "__main__":
    sys.exit(main())
