import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cvc.errors import DimensionError, ParameterError
from cvc.metrics import psnr
from cvc.pixels import (RgbFrame, YcocgFrame, luma, rgb_to_ycocg, subsample_chroma, upsample_chroma,
                        upsample_plane, ycocg_to_rgb)


def frame_of(rgb, h=16, w=16):
    return RgbFrame(np.broadcast_to(np.array(rgb, dtype=np.uint8), (h, w, 3)).copy())


@pytest.mark.parametrize("rgb, expected", [
    ((255, 255, 255), (255.0, 127.0, 127.0)),
    ((0, 0, 0), (0.0, 127.0, 127.0)),
    ((255, 0, 0), (63.75, 254.5, 63.25)),
])
def test_forward_values(rgb, expected):
    yc = rgb_to_ycocg(frame_of(rgb))
    assert (yc.y[0, 0], yc.co[0, 0], yc.cg[0, 0]) == expected


def test_white_inverse():
    yc = YcocgFrame(np.full((16, 16), 255.0), np.full((16, 16), 127.0), np.full((16, 16), 127.0))
    assert np.all(ycocg_to_rgb(yc).data == 255)


@given(arrays(np.uint8, (16, 17, 3)))
@settings(max_examples=50, deadline=None)
def test_real_round_trip_is_identity(data):
    f = RgbFrame(data)
    assert np.array_equal(ycocg_to_rgb(rgb_to_ycocg(f)).data, data)


def test_rounded_round_trip_psnr(corpus):
    for name, img in corpus:
        yc = rgb_to_ycocg(RgbFrame(img))
        r = YcocgFrame(np.round(yc.y), np.clip(np.round(yc.co), 0, 255), np.clip(np.round(yc.cg), 0, 255))
        assert psnr(img, ycocg_to_rgb(r).data) >= 48.0, name


def test_inverse_needs_full_chroma():
    yc = subsample_chroma(rgb_to_ycocg(frame_of((1, 2, 3), 32, 32)), 2)
    with pytest.raises(DimensionError):
        ycocg_to_rgb(yc)


def test_subsample_shapes_and_identity():
    f = rgb_to_ycocg(RgbFrame(np.zeros((144, 176, 3), np.uint8)))
    assert subsample_chroma(f, 1) is f
    s = subsample_chroma(f, 4)
    assert s.co.shape == (36, 44) and s.cg.shape == (36, 44) and s.chroma_factor == 4
    assert s.y is f.y


def test_subsample_odd_dims_take_ceiling():
    f = rgb_to_ycocg(RgbFrame(np.zeros((17, 21, 3), np.uint8)))
    assert subsample_chroma(f, 4).co.shape == (5, 6)


def test_subsample_rejects_unsupported_factor():
    f = rgb_to_ycocg(frame_of((0, 0, 0)))
    with pytest.raises(ParameterError):
        subsample_chroma(f, 3)


def test_constant_chroma_survives_resampling():
    f = rgb_to_ycocg(frame_of((200, 40, 90), 40, 56))
    for n in (1, 2, 4, 8):
        s = subsample_chroma(f, n)
        assert np.all(s.co == f.co[0, 0])
        u = upsample_chroma(s)
        assert u.co.shape == f.co.shape
        assert np.allclose(u.co, f.co[0, 0]) and np.allclose(u.cg, f.cg[0, 0])


def test_upsample_reproduces_ramps_in_interior():
    h, w, n = 32, 40, 2
    rows, cols = np.mgrid[0:h, 0:w]
    for ramp in (3.0 * cols + 7.0, -2.0 * rows + 100.0, 0.5 * rows + 1.5 * cols):
        coarse = ramp[::n, ::n]
        up = upsample_plane(coarse, n, (h, w))
        # the last coarse sample sits at h - n; beyond it the edge is replicated
        assert np.allclose(up[: h - n + 1, : w - n + 1], ramp[: h - n + 1, : w - n + 1])


def test_upsample_clamps_at_border():
    coarse = np.array([[0.0, 10.0]])
    up = upsample_plane(coarse, 2, (1, 4))
    assert np.allclose(up, [[0, 5, 10, 10]])


def test_frame_validation():
    with pytest.raises(DimensionError):
        RgbFrame(np.zeros((8, 32, 3), np.uint8))
    with pytest.raises(DimensionError):
        RgbFrame(np.zeros((32, 32), np.uint8))
    with pytest.raises(DimensionError):
        RgbFrame.from_bytes(b"\0" * 10, 16, 16)
    assert RgbFrame(np.zeros((4, 4, 3), np.uint8), min_side=1).width == 4


def test_luma_weights():
    assert luma(np.array([[[4, 8, 12]]]))[0, 0] == 1 + 4 + 3
