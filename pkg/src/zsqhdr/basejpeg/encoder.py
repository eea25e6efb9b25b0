"""Baseline sequential JPEG encoder (JFIF, Huffman, 8-bit)."""

from __future__ import annotations

import struct

import numpy as np

from ..errors import FormatError
from ..pixels import LdrImage
from . import tables
from .dct import fdct, quantize, rgb_to_ycc

SUBSAMPLING = {"444": (1, 1), "420": (2, 2)}

# marker codes
SOI, EOI, APP0, DQT, SOF0, DHT, SOS = 0xD8, 0xD9, 0xE0, 0xDB, 0xC0, 0xC4, 0xDA


def _segment(marker: int, payload: bytes) -> bytes:
    return struct.pack(">BBH", 0xFF, marker, len(payload) + 2) + payload


def _jfif_app0() -> bytes:
    return _segment(APP0, b"JFIF\x00" + struct.pack(">BBBHHBB", 1, 1, 0, 1, 1, 0, 0))


def _dqt(qtables) -> bytes:
    payload = b""
    for index, table in enumerate(qtables):
        payload += bytes([index]) + bytes(table[tables.ZIGZAG].astype(np.uint8))
    return _segment(DQT, payload)


def _sof0(width: int, height: int, sampling) -> bytes:
    h, v = sampling
    payload = struct.pack(">BHHB", 8, height, width, 3)
    payload += bytes([1, h << 4 | v, 0, 2, 0x11, 1, 3, 0x11, 1])
    return _segment(SOF0, payload)


def _dht() -> bytes:
    payload = b""
    for cls, ident, bits, vals in (
        (0, 0, tables.DC_LUMA_BITS, tables.DC_LUMA_VALS),
        (1, 0, tables.AC_LUMA_BITS, tables.AC_LUMA_VALS),
        (0, 1, tables.DC_CHROMA_BITS, tables.DC_CHROMA_VALS),
        (1, 1, tables.AC_CHROMA_BITS, tables.AC_CHROMA_VALS),
    ):
        payload += bytes([cls << 4 | ident]) + bytes(bits) + bytes(vals)
    return _segment(DHT, payload)


def _sos() -> bytes:
    return _segment(SOS, bytes([3, 1, 0x00, 2, 0x11, 3, 0x11, 0, 63, 0]))


def _code_arrays(bits, vals):
    codes = np.zeros(256, dtype=np.int64)
    lengths = np.zeros(256, dtype=np.int64)
    for symbol, (code, length) in tables.canonical_codes(bits, vals).items():
        codes[symbol] = code
        lengths[symbol] = length
    return codes, lengths


_DC_CODES = [_code_arrays(tables.DC_LUMA_BITS, tables.DC_LUMA_VALS),
             _code_arrays(tables.DC_CHROMA_BITS, tables.DC_CHROMA_VALS)]
_AC_CODES = [_code_arrays(tables.AC_LUMA_BITS, tables.AC_LUMA_VALS),
             _code_arrays(tables.AC_CHROMA_BITS, tables.AC_CHROMA_VALS)]


def _magnitude(values):
    """Size category and appended bits for signed coefficients."""
    values = np.asarray(values, dtype=np.int64)
    size = np.frexp(np.abs(values).astype(np.float64))[1].astype(np.int64)
    extra = np.where(values < 0, values + (1 << size) - 1, values)
    return size, extra


def _blocks(plane: np.ndarray) -> np.ndarray:
    rows, cols = plane.shape[0] // 8, plane.shape[1] // 8
    return plane.reshape(rows, 8, cols, 8).swapaxes(1, 2)


def _pad(plane: np.ndarray, height: int, width: int) -> np.ndarray:
    return np.pad(plane, ((0, height - plane.shape[0]), (0, width - plane.shape[1])), mode="edge")


def _downsample(plane: np.ndarray, h: int, v: int) -> np.ndarray:
    if h == v == 1:
        return plane
    rows, cols = plane.shape
    summed = plane.astype(np.int64).reshape(rows // v, v, cols // h, h).sum(axis=(1, 3))
    return ((summed + (h * v) // 2) // (h * v)).astype(np.uint8)


def _entropy_code(zigzag, component) -> bytes:
    """Huffman-code quantised blocks given in MCU order.

    ``zigzag`` is ``(n, 64)``; ``component`` holds each block's component
    index.
    """
    n = len(zigzag)
    table_of = np.minimum(component, 1)

    # DC differences within each component
    dc = zigzag[:, 0]
    diff = np.empty(n, dtype=np.int64)
    for comp in range(3):
        sel = np.flatnonzero(component == comp)
        vals = dc[sel]
        diff[sel] = np.diff(vals, prepend=0)
    dc_size, dc_extra = _magnitude(diff)

    words, lengths, blocks_of, keys = [], [], [], []

    for t in (0, 1):
        sel = table_of == t
        codes, lens = _DC_CODES[t]
        s = dc_size[sel]
        words.append((codes[s] << s) | dc_extra[sel])
        lengths.append(lens[s] + s)
        blocks_of.append(np.flatnonzero(sel))
        keys.append(np.zeros(sel.sum(), dtype=np.int64))

    block_idx, pos = np.nonzero(zigzag[:, 1:])
    pos = pos + 1
    values = zigzag[block_idx, pos]
    first = np.ones(len(block_idx), dtype=bool)
    first[1:] = block_idx[1:] != block_idx[:-1]
    prev = np.where(first, 0, np.roll(pos, 1))
    run = pos - prev - 1
    size, extra = _magnitude(values)
    zrl_count = run // 16
    symbol = (run % 16) << 4 | size
    ac_table = table_of[block_idx]

    for t in (0, 1):
        codes, lens = _AC_CODES[t]
        sel = ac_table == t
        sym = symbol[sel]
        words.append((codes[sym] << size[sel]) | extra[sel])
        lengths.append(lens[sym] + size[sel])
        blocks_of.append(block_idx[sel])
        keys.append(pos[sel] * 4 + 3)
        # zero-run-length escapes preceding each coefficient
        for j in range(3):
            zsel = sel & (zrl_count > j)
            count = int(zsel.sum())
            words.append(np.full(count, codes[0xF0]))
            lengths.append(np.full(count, lens[0xF0]))
            blocks_of.append(block_idx[zsel])
            keys.append(pos[zsel] * 4 + j)

    # end of block unless the last coefficient is non-zero
    eob = zigzag[:, 63] == 0
    for t in (0, 1):
        codes, lens = _AC_CODES[t]
        sel = eob & (table_of == t)
        count = int(sel.sum())
        words.append(np.full(count, codes[0x00]))
        lengths.append(np.full(count, lens[0x00]))
        blocks_of.append(np.flatnonzero(sel))
        keys.append(np.full(count, 64 * 4))

    words = np.concatenate(words)
    lengths = np.concatenate(lengths)
    order = np.lexsort((np.concatenate(keys), np.concatenate(blocks_of)))
    return _pack_bits(words[order], lengths[order])


def _pack_bits(words: np.ndarray, lengths: np.ndarray) -> bytes:
    total = int(lengths.sum())
    padded = -total % 8
    owner = np.repeat(np.arange(len(words)), lengths)
    starts = np.cumsum(lengths) - lengths
    offset = np.arange(total) - starts[owner]
    bits = (words[owner] >> (lengths[owner] - 1 - offset)) & 1
    bits = np.concatenate([bits, np.ones(padded, dtype=np.int64)]).astype(np.uint8)
    data = np.packbits(bits).tobytes()
    return data.replace(b"\xff", b"\xff\x00")


def encode_base(ldr: LdrImage, quality: int = 90, subsampling: str = "444") -> bytes:
    """Encode an 8-bit RGB image as a baseline JFIF stream."""
    if ldr.width == 0 or ldr.height == 0:
        raise FormatError("image has zero area")
    if ldr.width > 65535 or ldr.height > 65535:
        raise FormatError("image too large for baseline JPEG")
    if subsampling not in SUBSAMPLING:
        raise ValueError(f"unknown chroma subsampling {subsampling!r}")
    luma_q = tables.scaled_table(tables.LUMA_QUANT, quality)
    chroma_q = tables.scaled_table(tables.CHROMA_QUANT, quality)
    h, v = SUBSAMPLING[subsampling]

    mcu_w, mcu_h = 8 * h, 8 * v
    padded_h = -(-ldr.height // mcu_h) * mcu_h
    padded_w = -(-ldr.width // mcu_w) * mcu_w
    ycc = rgb_to_ycc(ldr.planes)
    planes = [_pad(p, padded_h, padded_w) for p in ycc]
    planes = [planes[0], _downsample(planes[1], h, v), _downsample(planes[2], h, v)]

    quant = []
    for comp, plane in enumerate(planes):
        blocks = _blocks(plane.astype(np.int64) - 128)
        coefficients = quantize(fdct(blocks), luma_q if comp == 0 else chroma_q)
        quant.append(coefficients.reshape(blocks.shape[:2] + (64,))[..., tables.ZIGZAG])

    # interleave into MCU order: Y blocks (v x h), then Cb, then Cr
    mcu_rows, mcu_cols = padded_h // mcu_h, padded_w // mcu_w
    luma = quant[0].reshape(mcu_rows, v, mcu_cols, h, 64).swapaxes(1, 2).reshape(mcu_rows, mcu_cols, h * v, 64)
    mcu = np.concatenate([luma, quant[1][:, :, None], quant[2][:, :, None]], axis=2)
    zigzag = mcu.reshape(-1, 64)
    component = np.tile(np.array([0] * (h * v) + [1, 2]), mcu_rows * mcu_cols)

    scan = _entropy_code(zigzag, component)
    return b"".join([
        b"\xff\xd8",
        _jfif_app0(),
        _dqt([luma_q, chroma_q]),
        _sof0(ldr.width, ldr.height, (h, v)),
        _dht(),
        _sos(),
        scan,
        b"\xff\xd9",
    ])
