"""Two-layer near-lossless HDR image coding with a legacy JPEG base layer.

The base layer is a baseline JPEG of a tone-mapped rendition; the residual
layer is quantised with zero-skip quantisation, packed, coded losslessly and
carried in APP11 segments, so any JPEG decoder still shows the base image
while :func:`decode_image` reconstructs every HDR sample within a chosen
error bound.
"""

from .codec import decode_image, decode_layers, encode_image, error_bound
from .errors import CodecError, FormatError, IntegrityError
from .pixels import HALF, INTEGER, FloatMapping, HdrImage, LdrImage, load_hdr, store_hdr
from .tonemap import TmoParams

__version__ = "0.1.0"

__all__ = [
    "encode_image",
    "decode_image",
    "decode_layers",
    "error_bound",
    "CodecError",
    "FormatError",
    "IntegrityError",
    "FloatMapping",
    "HALF",
    "INTEGER",
    "HdrImage",
    "LdrImage",
    "load_hdr",
    "store_hdr",
    "TmoParams",
]
