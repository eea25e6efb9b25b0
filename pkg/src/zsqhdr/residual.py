"""Residual layer: HDR minus the decoded base layer, colour transform, bias,
and a lossless codec for packed index planes."""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .errors import FormatError
from .pixels import HdrImage, LdrImage
from .tonemap import TmoParams, inverse_tmo
from .zsq import IndexImage

__all__ = [
    "TRANSFORMS",
    "CODECS",
    "ResidualPlanes",
    "compute_residual",
    "reconstruct_residual",
    "color_forward",
    "color_inverse",
    "encode_plane",
    "decode_plane",
    "med_predict",
]

TRANSFORMS = {"none": 0, "rct": 1}
CODECS = {"raw": 0, "predictive-deflate": 1}


def color_forward(r, g, b):
    """Integer reversible colour transform; returns ``(y, cb, cr)``."""
    r, g, b = (np.asarray(p, dtype=np.int64) for p in (r, g, b))
    y = (r + 2 * g + b) >> 2
    return y, b - g, r - g


def color_inverse(y, cb, cr):
    y, cb, cr = (np.asarray(p, dtype=np.int64) for p in (y, cb, cr))
    g = y - ((cb + cr) >> 2)
    return cr + g, g, cb + g


@dataclass(frozen=True)
class ResidualPlanes:
    """Three non-negative residual planes and the biases that made them so.

    The signed residual of plane ``k`` is ``planes[k] - biases[k]``.
    """

    planes: np.ndarray
    biases: tuple
    transform: str = "rct"

    def __post_init__(self):
        if self.transform not in TRANSFORMS:
            raise ValueError(f"unknown colour transform {self.transform!r}")
        planes = np.asarray(self.planes, dtype=np.int64)
        if planes.ndim != 3 or planes.shape[0] != 3:
            raise ValueError("expected three residual planes")
        if planes.min() < 0:
            raise ValueError("biased residual must be non-negative")
        object.__setattr__(self, "planes", planes)
        object.__setattr__(self, "biases", tuple(int(b) for b in self.biases))

    def signed(self) -> np.ndarray:
        return self.planes - np.array(self.biases, dtype=np.int64)[:, None, None]


def compute_residual(
    hdr: HdrImage, base: LdrImage, tmo: TmoParams, transform: str = "rct"
) -> ResidualPlanes:
    """``hdr - inverse_tmo(base)`` per RGB plane, colour transformed and biased."""
    if (hdr.height, hdr.width) != (base.height, base.width):
        raise ValueError(
            f"HDR image is {hdr.width}x{hdr.height}, base layer is {base.width}x{base.height}"
        )
    predicted = inverse_tmo(base, tmo, hdr.depth, hdr.mapping)
    diff = hdr.planes.astype(np.int64) - predicted.planes.astype(np.int64)
    if transform == "rct":
        diff = np.stack(color_forward(*diff))
    elif transform != "none":
        raise ValueError(f"unknown colour transform {transform!r}")
    biases = -diff.reshape(3, -1).min(axis=1)
    return ResidualPlanes(diff + biases[:, None, None], tuple(biases), transform)


def reconstruct_residual(residual: ResidualPlanes) -> np.ndarray:
    """Signed RGB residual planes, shape ``(3, H, W)``."""
    signed = residual.signed()
    if residual.transform == "rct":
        return np.stack(color_inverse(*signed))
    return signed


# ---------------------------------------------------------------------------
# lossless index-plane codec

_HEADER = struct.Struct(">BIIIB")
_STORED, _DEFLATE, _MED = 0, 1, 2


def _byte_width(bin_count: int) -> int:
    top = max(bin_count - 1, 0)
    return 1 if top < 1 << 8 else 2 if top < 1 << 16 else 4


def _to_bytes(values: np.ndarray, width: int, planar: bool) -> bytes:
    raw = values.astype(f">u{width}")
    if planar and width > 1:
        # most significant bytes first; separates slowly varying bytes for deflate
        return raw.view(np.uint8).reshape(-1, width).T.tobytes()
    return raw.tobytes()


def _from_bytes(data: bytes, width: int, count: int, planar: bool) -> np.ndarray:
    if len(data) != width * count:
        raise FormatError("plane payload has the wrong size")
    raw = np.frombuffer(data, dtype=np.uint8)
    if planar and width > 1:
        raw = np.ascontiguousarray(raw.reshape(width, count).T)
    return raw.view(f">u{width}").astype(np.int64)


def med_predict(x: np.ndarray) -> np.ndarray:
    """Median edge detector prediction.  The first row predicts from the left,
    the first column from above, and the top-left sample from zero."""
    x = np.asarray(x, dtype=np.int64)
    a = np.zeros_like(x)
    b = np.zeros_like(x)
    c = np.zeros_like(x)
    a[:, 1:] = x[:, :-1]
    b[1:, :] = x[:-1, :]
    c[1:, 1:] = x[:-1, :-1]
    pred = np.where(
        c >= np.maximum(a, b),
        np.minimum(a, b),
        np.where(c <= np.minimum(a, b), np.maximum(a, b), a + b - c),
    )
    pred[0, 1:] = x[0, :-1]
    pred[1:, 0] = x[:-1, 0]
    pred[0, 0] = 0
    return pred


def _fold(error: np.ndarray, modulus: int) -> np.ndarray:
    """Reduce prediction errors modulo ``modulus`` and zig-zag them to
    ``[0, modulus)`` with small magnitudes first."""
    e = np.mod(error, modulus)
    signed = np.where(e >= (modulus + 1) // 2, e - modulus, e)
    return np.where(signed >= 0, 2 * signed, -2 * signed - 1)


def _unfold(folded: np.ndarray) -> np.ndarray:
    return np.where(folded % 2 == 0, folded // 2, -(folded + 1) // 2)


def _med_reconstruct(errors: np.ndarray, modulus: int) -> np.ndarray:
    height, width = errors.shape
    out = np.zeros((height, width), dtype=np.int64)
    out[0] = np.mod(np.cumsum(errors[0]), modulus)
    prev = out[0].tolist()
    rows = errors.tolist()
    for y in range(1, height):
        r = rows[y]
        cur = [0] * width
        a = (prev[0] + r[0]) % modulus
        cur[0] = a
        for x in range(1, width):
            b = prev[x]
            c = prev[x - 1]
            if c >= a and c >= b:
                p = a if a < b else b
            elif c <= a and c <= b:
                p = a if a > b else b
            else:
                p = a + b - c
            a = (p + r[x]) % modulus
            cur[x] = a
        out[y] = cur
        prev = cur
    return out


def encode_plane(index_image: IndexImage, codec: str = "predictive-deflate") -> bytes:
    """Serialise an index plane losslessly.

    ``predictive-deflate`` tries MED prediction and plain values, both
    deflated, and keeps whichever is smallest (falling back to stored bytes),
    so the payload never exceeds the raw size plus a 14-byte header.
    """
    if codec not in CODECS:
        raise ValueError(f"unknown plane codec {codec!r}")
    values = index_image.indices.astype(np.int64)
    height, width = values.shape
    modulus = max(index_image.bin_count, 1)
    nbytes = _byte_width(modulus)

    def header(mode):
        return _HEADER.pack(mode, height, width, index_image.bin_count, nbytes)

    stored = header(_STORED) + _to_bytes(values, nbytes, planar=False)
    if codec == "raw":
        return stored
    candidates = [stored]
    candidates.append(header(_DEFLATE) + zlib.compress(_to_bytes(values, nbytes, True), 9))
    if modulus > 1:
        folded = _fold(values - med_predict(values), modulus)
        candidates.append(header(_MED) + zlib.compress(_to_bytes(folded, nbytes, True), 9))
    return min(candidates, key=len)


def decode_plane(payload: bytes, codec: str = "predictive-deflate") -> IndexImage:
    if codec not in CODECS:
        raise FormatError(f"unknown plane codec {codec!r}")
    if len(payload) < _HEADER.size:
        raise FormatError("plane payload truncated")
    mode, height, width, bin_count, nbytes = _HEADER.unpack_from(payload)
    if nbytes != _byte_width(max(bin_count, 1)) or height == 0 or width == 0:
        raise FormatError("bad plane payload header")
    if codec == "raw" and mode != _STORED:
        raise FormatError("raw codec payload is not stored")
    body = payload[_HEADER.size :]
    count = height * width
    if mode == _STORED:
        values = _from_bytes(body, nbytes, count, planar=False)
    elif mode in (_DEFLATE, _MED):
        try:
            data = zlib.decompress(body)
        except zlib.error as exc:
            raise FormatError(f"corrupt plane payload: {exc}") from exc
        values = _from_bytes(data, nbytes, count, planar=True)
    else:
        raise FormatError(f"unknown plane payload mode {mode}")
    values = values.reshape(height, width)
    if mode == _MED:
        if values.max() >= bin_count:
            raise FormatError("corrupt plane payload: prediction error out of range")
        values = _med_reconstruct(_unfold(values), bin_count)
    if values.max() >= bin_count:
        raise FormatError("corrupt plane payload: index out of range")
    return IndexImage(values, bin_count)
