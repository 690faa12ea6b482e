import csv
import io

import numpy as np
import pytest

from cvc import bitstream as bs
from cvc.cli import build_parser, main
from cvc.pixels import RgbFrame
from cvc.videoio import read_y4m, write_rgb24, write_y4m
from media import talking_head


def run(*argv):
    out = io.StringIO()
    return main([str(a) for a in argv], out), out.getvalue()


@pytest.fixture(scope="module")
def clip_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "clip.y4m"
    write_y4m(path, talking_head(6), 15, 1)
    return path


def test_defaults():
    args = build_parser().parse_args(["encode", "--input", "a.y4m", "--output", "b.cvc"])
    assert (args.qph, args.qpl, args.levels, args.dfb, args.chroma_n, args.gop, args.search_w, args.mode) == \
        (14, None, 2, (2,), 4, 10, 8, "scalable")


def test_encode_info_decode(clip_file, tmp_path):
    cvc = tmp_path / "a.cvc"
    code, text = run("encode", "--input", clip_file, "--output", cvc, "--qph", 14, "--qpl", "auto", "--gop", 4)
    assert code == 0 and "qpl=1" in text
    h, recs = bs.read_stream(cvc.read_bytes())
    assert all(r.qpl == 1 and r.qph == 14 for r in recs)

    code, text = run("info", "--input", cvc)
    assert code == 0
    rows = [l.split() for l in text.splitlines() if l.split() and l.split()[0].isdigit()]
    assert [r[1] for r in rows] == ["K", "P", "P", "P", "K", "P"]
    assert h.size + sum(int(r[6]) for r in rows) == cvc.stat().st_size
    assert f"file {cvc.stat().st_size} bytes" in text

    out = tmp_path / "out.y4m"
    assert run("decode", "--input", cvc, "--output", out)[0] == 0
    _, frames = read_y4m(out)
    assert len(frames) == 6 and frames[0].data.shape == (144, 176, 3)
    assert run("decode", "--input", cvc, "--output", out, "--scale", 1)[0] == 0
    assert read_y4m(out)[1][0].data.shape == (72, 88, 3)


def test_qph_out_of_range(clip_file, tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["encode", "--input", str(clip_file), "--output", str(tmp_path / "x"), "--qph", "0"])
    assert exc.value.code == 2
    assert "[1, 181]" in capsys.readouterr().err


def test_decode_scale_out_of_range(clip_file, tmp_path, capsys):
    cvc = tmp_path / "a.cvc"
    run("encode", "--input", clip_file, "--output", cvc)
    assert run("decode", "--input", cvc, "--output", tmp_path / "o.y4m", "--scale", 5)[0] == 2
    assert "--scale" in capsys.readouterr().err


def test_bad_stream_exit_code(tmp_path):
    bad = tmp_path / "bad.cvc"
    bad.write_bytes(b"XXXX" + bytes(40))
    assert run("info", "--input", bad)[0] == 4
    assert run("decode", "--input", bad, "--output", tmp_path / "o.y4m")[0] == 4
    assert run("info", "--input", tmp_path / "missing.cvc")[0] == 3


def test_rgb24_needs_geometry(tmp_path):
    raw = tmp_path / "a.rgb"
    write_rgb24(raw, talking_head(1))
    assert run("encode", "--input", raw, "--output", tmp_path / "a.cvc")[0] == 3
    assert run("encode", "--input", raw, "--output", tmp_path / "a.cvc", "--width", 176, "--height", 144)[0] == 0


def test_psnr_command(tmp_path):
    clip = talking_head(2)
    a, b = tmp_path / "a.rgb", tmp_path / "b.rgb"
    geo = ("--width", 176, "--height", 144)
    write_rgb24(a, clip)
    code, text = run("psnr", "--ref", a, "--test", a, *geo)
    assert code == 0 and "mean Y-PSNR: inf dB" in text
    # +1 on every channel moves luma by exactly 1
    shifted = [RgbFrame(np.clip(f.data.astype(int) + 1, 0, 255).astype(np.uint8)) for f in clip]
    for f in clip:
        assert f.data.max() < 255
    write_rgb24(b, shifted)
    code, text = run("psnr", "--ref", a, "--test", b, *geo)
    assert "mean Y-PSNR: 48.1308 dB" in text
    c = tmp_path / "c.y4m"
    write_y4m(a.with_suffix(".y4m"), clip, 15, 1)
    write_y4m(c, [RgbFrame(f.data[:, :160].copy()) for f in clip], 15, 1)
    assert run("psnr", "--ref", a.with_suffix(".y4m"), "--test", c)[0] == 3


def test_rd_sweep(clip_file, tmp_path):
    out_csv = tmp_path / "rd.csv"
    code, text = run("rd-sweep", "--input", clip_file, "--qph-list", "14,56,168", "--csv", out_csv)
    assert code == 0
    rows = list(csv.DictReader(out_csv.open()))
    assert list(rows[0]) == ["qph", "qpl", "kbit_per_frame", "y_psnr_db"]
    assert [int(r["qph"]) for r in rows] == [14, 56, 168]
    assert [int(r["qpl"]) for r in rows] == [1, 4, 12]
    kbit = [float(r["kbit_per_frame"]) for r in rows]
    assert kbit == sorted(kbit, reverse=True)
    assert text == out_csv.read_text()

    # the standalone psnr command agrees with the sweep; rgb24 keeps the
    # decoded frames bit-exact, whereas y4m would resample chroma
    ref, cvc, dec = tmp_path / "ref.rgb", tmp_path / "p.cvc", tmp_path / "p.rgb"
    write_rgb24(ref, read_y4m(clip_file)[1])
    run("encode", "--input", clip_file, "--output", cvc, "--qph", 56)
    run("decode", "--input", cvc, "--output", dec)
    _, text = run("psnr", "--ref", ref, "--test", dec, "--width", 176, "--height", 144)
    mean = float(text.rsplit(":", 1)[1].split()[0])
    assert mean == pytest.approx(float(rows[1]["y_psnr_db"]), abs=0.01)
    assert float(rows[1]["kbit_per_frame"]) == pytest.approx(cvc.stat().st_size * 8 / 6 / 1000, abs=1e-3)


def test_rd_sweep_empty_list(clip_file):
    with pytest.raises(SystemExit) as exc:
        main(["rd-sweep", "--input", str(clip_file), "--qph-list", ","])
    assert exc.value.code == 2


def test_dfb_mismatch(clip_file, tmp_path):
    assert run("encode", "--input", clip_file, "--output", tmp_path / "a", "--levels", 3, "--dfb", "2,2")[0] == 2
    assert run("encode", "--input", clip_file, "--output", tmp_path / "a", "--levels", 3, "--dfb", "2,3,3")[0] == 0
