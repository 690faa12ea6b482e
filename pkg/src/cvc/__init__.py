"""Contourlet video codec: scalable CT-domain video compression."""

from .bitstream import FrameRecord, Section, StreamHeader, read_stream, truncate_to_scale, write_stream
from .codec import Decoder, Encoder, EncoderConfig, ReferenceState, decode_video, encode_video
from .contourlet import CtRepr, ct_forward, ct_inverse
from .errors import CvcError, DimensionError, FormatError, ParameterError, StreamError
from .metrics import y_psnr
from .motion import MotionField, estimate_motion, motion_compensate
from .pixels import RgbFrame, YcocgFrame, rgb_to_ycocg, ycocg_to_rgb
from .quant import QuantParams

__version__ = "0.1.0"

__all__ = [
    "CtRepr", "CvcError", "Decoder", "DimensionError", "Encoder", "EncoderConfig", "FormatError",
    "FrameRecord", "MotionField", "ParameterError", "QuantParams", "ReferenceState", "RgbFrame",
    "Section", "StreamError", "StreamHeader", "YcocgFrame", "ct_forward", "ct_inverse",
    "decode_video", "encode_video", "estimate_motion", "motion_compensate", "read_stream",
    "rgb_to_ycocg", "truncate_to_scale", "write_stream", "y_psnr", "ycocg_to_rgb",
]
