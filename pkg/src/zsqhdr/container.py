"""Multiplexing of the base JPEG stream and the extension layer.

The extension layer rides in APP11 marker segments placed right after the
base stream's JFIF APP0 segment, so legacy decoders skip it.  Layout::

    SOI APP0(JFIF) APP11(header) APP11(table x3) APP11(payload chunks ...)
    DQT SOF0 DHT SOS <entropy-coded data> EOI

Each APP11 segment body is::

    "ZSQ0"  version:u8  kind:u8  plane:u8  seq:u16  total:u16
    length:u32  crc32:u32  data...

``kind`` is 0 for the header, 1 for an unpacking table and 2 for an index
plane payload.  A logical payload larger than one segment is split into
``total`` chunks numbered from 0; ``length`` and ``crc32`` describe the whole
reassembled payload and are repeated in every chunk.  Integers are big-endian.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, IntegrityError
from .residual import CODECS, TRANSFORMS
from .zsq import ZsqCodebook

__all__ = [
    "ContainerHeader",
    "Container",
    "encode_table",
    "decode_table",
    "dpcm_encode",
    "dpcm_decode",
    "mux",
    "demux",
    "strip_app11",
    "segment_map",
]

MAGIC = b"ZSQ0"
VERSION = 1
APP11 = 0xEB
MAX_SEGMENT_PAYLOAD = 65533
_BOX = struct.Struct(">4sBBBHHII")
MAX_CHUNK_DATA = MAX_SEGMENT_PAYLOAD - _BOX.size

KIND_HEADER, KIND_TABLE, KIND_PAYLOAD = 0, 1, 2

MAPPING_IDS = {"half": 0, "fixed": 1, "integer": 2}
TRANSFORM_IDS = TRANSFORMS
CODEC_IDS = CODECS
SUBSAMPLING_IDS = {"444": 0, "420": 1}
COMPRESSOR_IDS = {"zlib": 0}

_HEADER = struct.Struct(">IIBBdddIBIIBB3q3BB")


def _reverse(table):
    return {v: k for k, v in table.items()}


@dataclass(frozen=True)
class ContainerHeader:
    width: int
    height: int
    depth: int
    mapping: str
    mapping_scale: float
    exposure: float
    gamma: float
    white_point: int
    transform: str
    epsilon: int
    delta: int
    quality: int
    subsampling: str
    biases: tuple
    codecs: tuple = ("predictive-deflate",) * 3
    table_compressor: str = "zlib"

    def to_bytes(self) -> bytes:
        return _HEADER.pack(
            self.width,
            self.height,
            self.depth,
            MAPPING_IDS[self.mapping],
            self.mapping_scale,
            self.exposure,
            self.gamma,
            self.white_point,
            TRANSFORM_IDS[self.transform],
            self.epsilon,
            self.delta,
            self.quality,
            SUBSAMPLING_IDS[self.subsampling],
            *self.biases,
            *(CODEC_IDS[c] for c in self.codecs),
            COMPRESSOR_IDS[self.table_compressor],
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "ContainerHeader":
        if len(data) != _HEADER.size:
            raise FormatError(f"container header has {len(data)} bytes, expected {_HEADER.size}")
        fields = _HEADER.unpack(data)
        try:
            return cls(
                width=fields[0],
                height=fields[1],
                depth=fields[2],
                mapping=_reverse(MAPPING_IDS)[fields[3]],
                mapping_scale=fields[4],
                exposure=fields[5],
                gamma=fields[6],
                white_point=fields[7],
                transform=_reverse(TRANSFORM_IDS)[fields[8]],
                epsilon=fields[9],
                delta=fields[10],
                quality=fields[11],
                subsampling=_reverse(SUBSAMPLING_IDS)[fields[12]],
                biases=tuple(fields[13:16]),
                codecs=tuple(_reverse(CODEC_IDS)[c] for c in fields[16:19]),
                table_compressor=_reverse(COMPRESSOR_IDS)[fields[19]],
            )
        except KeyError as exc:
            raise FormatError(f"unknown identifier {exc} in container header") from exc


@dataclass(frozen=True)
class Container:
    base: bytes
    header: ContainerHeader
    tables: tuple = field(default_factory=tuple)
    payloads: tuple = field(default_factory=tuple)


# ---------------------------------------------------------------------------
# unpacking tables


def dpcm_encode(reps) -> np.ndarray:
    """First value verbatim, then successive differences (all positive)."""
    reps = np.asarray(reps, dtype=np.int64)
    if reps.ndim != 1 or reps.size == 0:
        raise ValueError("unpacking table must be a non-empty vector")
    if reps[0] < 0:
        raise ValueError("unpacking table values must be non-negative")
    deltas = np.diff(reps)
    if np.any(deltas <= 0):
        raise ValueError("unpacking table is not strictly increasing")
    return np.concatenate([reps[:1], deltas])


def dpcm_decode(coded) -> np.ndarray:
    return np.cumsum(np.asarray(coded, dtype=np.int64))


def encode_table(table, compressor: str = "zlib") -> bytes:
    """DPCM-code and compress an unpacking table (codebook or rep vector)."""
    reps = table.reps if isinstance(table, ZsqCodebook) else table
    coded = dpcm_encode(reps)
    if coded.max() >= 1 << 32:
        raise ValueError("unpacking table value exceeds 32 bits")
    planes = coded.astype(">u4").view(np.uint8).reshape(-1, 4).T.tobytes()
    body = struct.pack(">I", len(coded)) + planes
    return bytes([COMPRESSOR_IDS[compressor]]) + zlib.compress(body, 9)


def decode_table(data: bytes) -> np.ndarray:
    if not data:
        raise FormatError("empty unpacking table")
    if data[0] not in _reverse(COMPRESSOR_IDS):
        raise FormatError(f"unknown table compressor id {data[0]}")
    try:
        body = zlib.decompress(data[1:])
    except zlib.error as exc:
        raise FormatError(f"corrupt unpacking table: {exc}") from exc
    if len(body) < 4:
        raise FormatError("corrupt unpacking table")
    (count,) = struct.unpack_from(">I", body)
    if count == 0 or len(body) != 4 + 4 * count:
        raise FormatError("corrupt unpacking table")
    planes = np.frombuffer(body, dtype=np.uint8, offset=4).reshape(4, count)
    coded = np.ascontiguousarray(planes.T).view(">u4").ravel().astype(np.int64)
    if count > 1 and coded[1:].min() <= 0:
        raise FormatError("unpacking table is not strictly increasing")
    return dpcm_decode(coded)


# ---------------------------------------------------------------------------
# marker segments


def _segments(stream: bytes):
    """Yield ``(marker, start, end)`` for the segments between SOI and SOS."""
    if stream[:2] != b"\xff\xd8":
        raise FormatError("not a JPEG stream (missing SOI)")
    pos = 2
    while True:
        if pos + 4 > len(stream) or stream[pos] != 0xFF:
            raise FormatError("malformed stream: bad marker segment")
        marker = stream[pos + 1]
        if marker == 0xFF:
            pos += 1
            continue
        (length,) = struct.unpack_from(">H", stream, pos + 2)
        end = pos + 2 + length
        if length < 2 or end > len(stream):
            raise FormatError("malformed stream: segment length out of range")
        yield marker, pos, end
        if marker == 0xDA:
            return
        pos = end


def segment_map(stream: bytes) -> list:
    """``(marker, offset, length)`` for every header segment; useful for inspection."""
    return [(m, s, e - s) for m, s, e in _segments(stream)]


def strip_app11(stream: bytes) -> bytes:
    """Remove every APP11 segment, leaving what a legacy decoder actually uses."""
    out = bytearray()
    last = 0
    for marker, start, end in _segments(stream):
        if marker == APP11:
            out += stream[last:start]
            last = end
    out += stream[last:]
    return bytes(out)


def _boxes(kind: int, plane: int, data: bytes):
    chunks = [data[i : i + MAX_CHUNK_DATA] for i in range(0, len(data), MAX_CHUNK_DATA)] or [b""]
    if len(chunks) > 0xFFFF:
        raise ValueError("payload too large for one container")
    crc = zlib.crc32(data)
    for seq, chunk in enumerate(chunks):
        body = _BOX.pack(MAGIC, VERSION, kind, plane, seq, len(chunks), len(data), crc) + chunk
        yield struct.pack(">BBH", 0xFF, APP11, len(body) + 2) + body


def mux(container: Container) -> bytes:
    base = container.base
    if len(container.tables) != 3 or len(container.payloads) != 3:
        raise ValueError("container needs three tables and three payloads")
    insert_at = 2
    for marker, start, end in _segments(base):
        if marker == APP11:
            raise ValueError("base stream already carries APP11 segments")
        if start == 2 and marker == 0xE0:
            insert_at = end
    boxes = list(_boxes(KIND_HEADER, 0, container.header.to_bytes()))
    for plane, table in enumerate(container.tables):
        boxes.extend(_boxes(KIND_TABLE, plane, table))
    for plane, payload in enumerate(container.payloads):
        boxes.extend(_boxes(KIND_PAYLOAD, plane, payload))
    return base[:insert_at] + b"".join(boxes) + base[insert_at:]


def demux(stream: bytes) -> Container:
    stream = bytes(stream)
    groups = {}
    kept = bytearray()
    last = 0
    for marker, start, end in _segments(stream):
        if marker != APP11:
            continue
        body = stream[start + 4 : end]
        if not body.startswith(MAGIC[:3]):
            continue  # foreign APP11, leave it to the base stream
        if len(body) < _BOX.size or body[:4] != MAGIC:
            raise FormatError("bad extension magic")
        magic, version, kind, plane, seq, total, length, crc = _BOX.unpack_from(body)
        if version != VERSION:
            raise FormatError(f"unsupported extension version {version}")
        if kind not in (KIND_HEADER, KIND_TABLE, KIND_PAYLOAD) or plane > 2 or total == 0:
            raise FormatError("bad extension box")
        group = groups.setdefault((kind, plane), {"total": total, "length": length, "crc": crc, "chunks": {}})
        if (group["total"], group["length"], group["crc"]) != (total, length, crc):
            raise IntegrityError(f"inconsistent chunk headers for box {kind}/{plane}")
        if seq in group["chunks"]:
            raise IntegrityError(f"duplicate chunk {seq} for box {kind}/{plane}")
        group["chunks"][seq] = body[_BOX.size :]
        kept += stream[last:start]
        last = end
    kept += stream[last:]
    if not groups:
        raise FormatError("no extension layer found (plain JPEG file?)")

    def assemble(kind, plane):
        group = groups.get((kind, plane))
        if group is None:
            raise IntegrityError(f"missing chunks: no data for box {kind}/{plane}")
        seqs = sorted(group["chunks"])
        if seqs != list(range(group["total"])):
            missing = sorted(set(range(group["total"])) - set(seqs))
            raise IntegrityError(f"sequence gap in box {kind}/{plane}: missing chunks {missing}")
        data = b"".join(group["chunks"][s] for s in seqs)
        if len(data) != group["length"]:
            raise IntegrityError(f"length mismatch in box {kind}/{plane}")
        if zlib.crc32(data) != group["crc"]:
            raise IntegrityError(f"checksum mismatch in box {kind}/{plane}")
        return data

    header = ContainerHeader.from_bytes(assemble(KIND_HEADER, 0))
    tables = tuple(assemble(KIND_TABLE, p) for p in range(3))
    payloads = tuple(assemble(KIND_PAYLOAD, p) for p in range(3))
    return Container(bytes(kept), header, tables, payloads)
