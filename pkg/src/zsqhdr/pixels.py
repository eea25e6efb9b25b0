"""Image model and HDR file I/O.

Every stage of the codec works on integer samples.  Float radiance read from
PFM or Radiance files is turned into 16-bit integers by a :class:`FloatMapping`;
the mapping travels with the image so the decoder can undo it.

Supported files:

* PFM (``PF`` colour and ``Pf`` grey, either endianness)
* Radiance ``.hdr`` (RGBE, flat or new-style run-length scanlines)
* binary PNM (``P6``/``P5``) with maxval between 256 and 65535
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError

__all__ = [
    "FloatMapping",
    "HALF",
    "INTEGER",
    "HdrImage",
    "LdrImage",
    "load_hdr",
    "store_hdr",
    "read_pfm",
    "write_pfm",
    "read_rgbe",
    "write_rgbe",
    "read_pnm",
    "write_pnm",
]

MAX_DEPTH = 16
HALF_MAX = 65504.0


def round_half_up(values):
    """Round to the nearest integer, ties toward +inf."""
    return np.floor(np.asarray(values, dtype=np.float64) + 0.5)


@dataclass(frozen=True)
class FloatMapping:
    """Conversion between float radiance and integer samples.

    ``mode`` is one of

    ``"half"``
        the sample is the IEEE binary16 bit pattern of the (clamped) float;
        negative values become 0 and values above 65504 saturate.
    ``"fixed"``
        the sample is ``round(value * scale)`` clamped to 16 bits.
    ``"integer"``
        the source was already integer (PNM); no float conversion happens.
    """

    mode: str = "half"
    scale: float = 1.0

    MODES = ("half", "fixed", "integer")

    def __post_init__(self):
        if self.mode not in self.MODES:
            raise ValueError(f"unknown float mapping {self.mode!r}")
        if not (self.scale > 0 and np.isfinite(self.scale)):
            raise ValueError("mapping scale must be positive and finite")

    def to_integer(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=np.float32)
        if not np.all(np.isfinite(values)):
            raise FormatError("non-finite float sample")
        if self.mode == "half":
            clamped = np.clip(values, 0.0, HALF_MAX)
            # -0.0 would map to 0x8000
            clamped = np.where(clamped > 0, clamped, np.float32(0.0))
            return clamped.astype(np.float16).view(np.uint16).astype(np.uint16)
        if self.mode == "fixed":
            scaled = round_half_up(values.astype(np.float64) * self.scale)
            return np.clip(scaled, 0, 2**MAX_DEPTH - 1).astype(np.uint16)
        raise ValueError("integer mapping has no float conversion")

    def to_float(self, samples) -> np.ndarray:
        samples = np.asarray(samples)
        if self.mode == "half":
            return samples.astype(np.uint16).view(np.float16).astype(np.float32)
        if self.mode == "fixed":
            return (samples.astype(np.float64) / self.scale).astype(np.float32)
        return samples.astype(np.float32)

    def max_sample(self, depth: int) -> int:
        """Largest sample that decodes to a finite, non-negative value."""
        if self.mode == "half":
            return min(2**depth - 1, 0x7BFF)
        return 2**depth - 1

    def linear(self, samples) -> np.ndarray:
        """Linear light value used by the tone mapper.

        Only half mapping differs from the sample itself; fixed-point and
        integer samples are already proportional to radiance.
        """
        samples = np.asarray(samples)
        if self.mode == "half":
            out = samples.astype(np.uint16).view(np.float16).astype(np.float64)
            out = np.nan_to_num(out, nan=0.0, posinf=HALF_MAX, neginf=0.0)
            return np.maximum(out, 0.0)
        return samples.astype(np.float64)

    def from_linear(self, values) -> np.ndarray:
        """Nearest integer sample for a linear value (inverse of :meth:`linear`)."""
        values = np.asarray(values, dtype=np.float64)
        if self.mode == "half":
            clamped = np.clip(values, 0.0, HALF_MAX)
            return clamped.astype(np.float16).view(np.uint16).astype(np.int64)
        return round_half_up(values).astype(np.int64)


HALF = FloatMapping("half")
INTEGER = FloatMapping("integer")


def _freeze(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class HdrImage:
    """Three-plane integer HDR raster, planes in R, G, B order.

    ``planes`` has shape ``(3, height, width)``; samples lie in
    ``[0, 2**depth)``.
    """

    planes: np.ndarray
    depth: int
    mapping: FloatMapping = field(default=INTEGER)

    def __post_init__(self):
        planes = np.asarray(self.planes)
        if planes.ndim != 3 or planes.shape[0] != 3:
            raise FormatError(f"expected 3 sample planes, got shape {planes.shape}")
        if planes.shape[1] == 0 or planes.shape[2] == 0:
            raise FormatError("image has zero area")
        if not 9 <= self.depth <= MAX_DEPTH:
            raise FormatError(f"HDR sample depth must be 9..16 bits, got {self.depth}")
        if planes.dtype.kind not in "iu":
            raise FormatError("samples must be integers")
        if planes.size and (planes.min() < 0 or planes.max() >= 2**self.depth):
            raise FormatError(f"sample outside [0, 2**{self.depth})")
        object.__setattr__(self, "planes", _freeze(planes.astype(np.uint16)))

    @property
    def height(self) -> int:
        return self.planes.shape[1]

    @property
    def width(self) -> int:
        return self.planes.shape[2]

    def to_float(self) -> np.ndarray:
        """Radiance as an ``(height, width, 3)`` float32 array."""
        return np.moveaxis(self.mapping.to_float(self.planes), 0, -1)

    def __eq__(self, other):
        if not isinstance(other, HdrImage):
            return NotImplemented
        return (
            self.depth == other.depth
            and self.mapping == other.mapping
            and np.array_equal(self.planes, other.planes)
        )

    __hash__ = None


@dataclass(frozen=True)
class LdrImage:
    """Three-plane 8-bit raster, shape ``(3, height, width)``."""

    planes: np.ndarray

    def __post_init__(self):
        planes = np.asarray(self.planes)
        if planes.ndim != 3 or planes.shape[0] != 3:
            raise FormatError(f"expected 3 sample planes, got shape {planes.shape}")
        if planes.dtype != np.uint8:
            if planes.size and (planes.min() < 0 or planes.max() > 255):
                raise FormatError("LDR samples must be within 0..255")
            planes = planes.astype(np.uint8)
        object.__setattr__(self, "planes", _freeze(planes))

    @property
    def height(self) -> int:
        return self.planes.shape[1]

    @property
    def width(self) -> int:
        return self.planes.shape[2]

    @classmethod
    def from_interleaved(cls, rgb) -> "LdrImage":
        return cls(np.moveaxis(np.asarray(rgb, dtype=np.uint8), -1, 0))

    def interleaved(self) -> np.ndarray:
        return np.ascontiguousarray(np.moveaxis(self.planes, 0, -1))

    def __eq__(self, other):
        if not isinstance(other, LdrImage):
            return NotImplemented
        return np.array_equal(self.planes, other.planes)

    __hash__ = None


# ---------------------------------------------------------------------------
# PFM


def _header_tokens(data: bytes, count: int, start: int = 0):
    """Split ``count`` whitespace-separated tokens off the front of a header,
    skipping ``#`` comments.  Returns the tokens and the offset just past the
    single whitespace byte that terminates the last one."""
    tokens = []
    pos = start
    while len(tokens) < count:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        end = pos
        while end < len(data) and not data[end : end + 1].isspace():
            end += 1
        if end == pos:
            raise FormatError("truncated header")
        tokens.append(data[pos:end].decode("ascii", "replace"))
        pos = end
    if pos >= len(data):
        raise FormatError("truncated header")
    return tokens, pos + 1


def read_pfm(path) -> np.ndarray:
    """Read a PFM file as an ``(height, width, channels)`` float32 array, top row first."""
    data = Path(path).read_bytes()
    tokens, offset = _header_tokens(data, 4)
    kind, width, height, scale = tokens
    if kind not in ("PF", "Pf"):
        raise FormatError(f"not a PFM file (magic {kind!r})")
    try:
        width, height, scale = int(width), int(height), float(scale)
    except ValueError as exc:
        raise FormatError("bad PFM header") from exc
    if width <= 0 or height <= 0 or scale == 0:
        raise FormatError("bad PFM header")
    channels = 3 if kind == "PF" else 1
    dtype = "<f4" if scale < 0 else ">f4"
    count = width * height * channels
    raw = data[offset : offset + 4 * count]
    if len(raw) != 4 * count:
        raise FormatError("PFM pixel data truncated")
    pixels = np.frombuffer(raw, dtype=dtype).astype(np.float32)
    # rows are stored bottom to top
    return pixels.reshape(height, width, channels)[::-1].copy()


def write_pfm(path, pixels) -> None:
    pixels = np.asarray(pixels, dtype=np.float32)
    if pixels.ndim == 2:
        pixels = pixels[..., None]
    height, width, channels = pixels.shape
    kind = {3: "PF", 1: "Pf"}[channels]
    header = f"{kind}\n{width} {height}\n-1.0\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(pixels[::-1].astype("<f4").tobytes())


# ---------------------------------------------------------------------------
# Radiance RGBE

_RESOLUTION = re.compile(rb"^([-+])Y\s+(\d+)\s+([-+])X\s+(\d+)$")


def rgbe_to_float(rgbe) -> np.ndarray:
    """Decode RGBE quadruples: ``mantissa * 2**(exponent - 136)``; exponent 0 is black."""
    rgbe = np.asarray(rgbe, dtype=np.uint8)
    exponent = rgbe[..., 3].astype(np.int32)
    factor = np.where(exponent == 0, 0.0, np.ldexp(1.0, exponent - 136))
    return (rgbe[..., :3].astype(np.float64) * factor[..., None]).astype(np.float32)


def float_to_rgbe(pixels) -> np.ndarray:
    pixels = np.asarray(pixels, dtype=np.float64)
    peak = pixels.max(axis=-1)
    mantissa, exponent = np.frexp(peak)
    small = peak < 1e-32
    scale = np.where(small, 0.0, mantissa * 256.0 / np.where(small, 1.0, peak))
    out = np.zeros(pixels.shape[:-1] + (4,), dtype=np.uint8)
    out[..., :3] = np.clip(pixels * scale[..., None], 0, 255).astype(np.uint8)
    out[..., 3] = np.where(small, 0, exponent + 128).astype(np.uint8)
    return out


def _read_rle_scanline(data: bytes, pos: int, width: int):
    scan = np.empty((4, width), dtype=np.uint8)
    for channel in range(4):
        x = 0
        while x < width:
            if pos >= len(data):
                raise FormatError("RGBE scanline truncated")
            count = data[pos]
            pos += 1
            if count > 128:
                count -= 128
                if x + count > width or pos >= len(data):
                    raise FormatError("bad RGBE run length")
                scan[channel, x : x + count] = data[pos]
                pos += 1
            else:
                if count == 0 or x + count > width or pos + count > len(data):
                    raise FormatError("bad RGBE run length")
                scan[channel, x : x + count] = np.frombuffer(data, np.uint8, count, pos)
                pos += count
            x += count
    return scan.T, pos


def read_rgbe(path) -> np.ndarray:
    """Read a Radiance ``.hdr`` file as an ``(height, width, 3)`` float32 array."""
    data = Path(path).read_bytes()
    if not (data.startswith(b"#?RADIANCE") or data.startswith(b"#?RGBE")):
        raise FormatError("not a Radiance file")
    pos = 0
    while True:
        end = data.find(b"\n", pos)
        if end < 0:
            raise FormatError("Radiance header truncated")
        line = data[pos:end].strip()
        pos = end + 1
        if line.startswith(b"FORMAT=") and line != b"FORMAT=32-bit_rle_rgbe":
            raise FormatError(f"unsupported Radiance format {line!r}")
        if not line:
            break
    end = data.find(b"\n", pos)
    match = _RESOLUTION.match(data[pos:end].strip() if end >= 0 else b"")
    if not match or match.group(1) != b"-" or match.group(3) != b"+":
        raise FormatError("unsupported Radiance resolution line")
    height, width = int(match.group(2)), int(match.group(4))
    pos = end + 1
    rgbe = np.empty((height, width, 4), dtype=np.uint8)
    for y in range(height):
        head = data[pos : pos + 4]
        if (
            8 <= width <= 0x7FFF
            and len(head) == 4
            and head[0] == 2
            and head[1] == 2
            and not head[2] & 0x80
        ):
            if (head[2] << 8 | head[3]) != width:
                raise FormatError("RGBE scanline width mismatch")
            rgbe[y], pos = _read_rle_scanline(data, pos + 4, width)
        else:
            raw = data[pos : pos + 4 * width]
            if len(raw) != 4 * width:
                raise FormatError("RGBE pixel data truncated")
            rgbe[y] = np.frombuffer(raw, np.uint8).reshape(width, 4)
            pos += 4 * width
    return rgbe_to_float(rgbe)


def write_rgbe(path, pixels) -> None:
    """Write flat (non run-length) Radiance RGBE."""
    pixels = np.asarray(pixels, dtype=np.float32)
    height, width = pixels.shape[:2]
    header = (
        b"#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n"
        + f"-Y {height} +X {width}\n".encode("ascii")
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(float_to_rgbe(pixels).tobytes())


# ---------------------------------------------------------------------------
# PNM


def read_pnm(path):
    """Read binary PGM/PPM.  Returns ``(samples, maxval)`` with samples shaped
    ``(height, width, channels)``."""
    data = Path(path).read_bytes()
    tokens, offset = _header_tokens(data, 4)
    kind = tokens[0]
    if kind not in ("P5", "P6"):
        raise FormatError(f"unsupported PNM type {kind!r}")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise FormatError("bad PNM header") from exc
    if width <= 0 or height <= 0 or not 0 < maxval <= 65535:
        raise FormatError("bad PNM header")
    channels = 3 if kind == "P6" else 1
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    count = width * height * channels
    raw = data[offset : offset + count * dtype.itemsize]
    if len(raw) != count * dtype.itemsize:
        raise FormatError("PNM pixel data truncated")
    samples = np.frombuffer(raw, dtype=dtype).astype(np.uint16).reshape(height, width, channels)
    if samples.max() > maxval:
        raise FormatError("PNM sample exceeds maxval")
    return samples, maxval


def write_pnm(path, samples, maxval: int) -> None:
    samples = np.asarray(samples)
    if samples.ndim == 2:
        samples = samples[..., None]
    height, width, channels = samples.shape
    kind = {3: "P6", 1: "P5"}[channels]
    dtype = ">u2" if maxval > 255 else "u1"
    with open(path, "wb") as fh:
        fh.write(f"{kind}\n{width} {height}\n{maxval}\n".encode("ascii"))
        fh.write(samples.astype(dtype).tobytes())


# ---------------------------------------------------------------------------

_FLOAT_SUFFIXES = {".pfm": "pfm", ".hdr": "rgbe", ".pic": "rgbe", ".rgbe": "rgbe"}
_PNM_SUFFIXES = {".ppm", ".pgm", ".pnm"}


def _sniff(path: Path, data_head: bytes) -> str:
    if data_head[:2] in (b"PF", b"Pf"):
        return "pfm"
    if data_head.startswith(b"#?"):
        return "rgbe"
    if data_head[:2] in (b"P5", b"P6"):
        return "pnm"
    raise FormatError(f"unsupported image format: {path}")


def _three_planes(pixels: np.ndarray) -> np.ndarray:
    if pixels.shape[-1] == 1:
        pixels = np.repeat(pixels, 3, axis=-1)
    return np.moveaxis(pixels, -1, 0)


def load_hdr(path, mapping: FloatMapping = HALF) -> HdrImage:
    """Load an HDR file into the integer sample domain.

    Float formats go through ``mapping``; PNM samples are taken verbatim and
    the image depth is the bit length of the file's maxval.  Grey inputs are
    replicated into three planes.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        kind = _sniff(path, fh.read(16))
    if kind == "pnm":
        samples, maxval = read_pnm(path)
        depth = int(maxval).bit_length()
        if depth <= 8:
            raise FormatError("8-bit PNM input is already LDR")
        return HdrImage(_three_planes(samples), depth, INTEGER)
    if mapping.mode == "integer":
        raise ValueError("float input needs a half or fixed mapping")
    pixels = read_pfm(path) if kind == "pfm" else read_rgbe(path)
    return HdrImage(_three_planes(mapping.to_integer(pixels)), MAX_DEPTH, mapping)


def store_hdr(img: HdrImage, path, mapping: FloatMapping | None = None) -> None:
    """Write ``img``; the format follows the file suffix.

    PNM output stores the integer samples with maxval ``2**depth - 1`` and is
    lossless.  PFM output is lossless for half and fixed mappings (every
    representable value fits in float32); Radiance output is lossy.
    """
    path = Path(path)
    mapping = mapping or img.mapping
    suffix = path.suffix.lower()
    if suffix in _PNM_SUFFIXES:
        write_pnm(path, np.moveaxis(img.planes, 0, -1), 2**img.depth - 1)
        return
    if suffix not in _FLOAT_SUFFIXES:
        raise FormatError(f"cannot infer output format from {path.name!r}")
    pixels = np.moveaxis(mapping.to_float(img.planes), 0, -1)
    if _FLOAT_SUFFIXES[suffix] == "pfm":
        write_pfm(path, pixels)
    else:
        write_rgbe(path, pixels)
