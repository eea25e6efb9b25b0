"""Baseline sequential JPEG decoder.

Handles Huffman-coded 8-bit DCT streams (SOF0/SOF1), interleaved or
single-component scans, restart intervals and any sampling factors up to 4.
Chroma is upsampled by replication.  Progressive, lossless, hierarchical and
arithmetic-coded streams are rejected.
"""

from __future__ import annotations

import re
import struct
from dataclasses import dataclass, field

import numpy as np

from ..errors import FormatError
from ..pixels import LdrImage
from . import tables
from .dct import idct, ycc_to_rgb

_MARKER = re.compile(rb"\xff[^\x00\xd0-\xd7]")
_UNZIGZAG = np.argsort(tables.ZIGZAG)


@dataclass
class _Component:
    ident: int
    h: int
    v: int
    tq: int
    blocks_w: int = 0
    blocks_h: int = 0
    coefficients: list = field(default_factory=list)
    dc_table: int = 0
    ac_table: int = 0


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def _lookup(bits, vals) -> list:
    """65536-entry table mapping a 16-bit window to ``length << 8 | symbol``."""
    table = np.zeros(1 << 16, dtype=np.int64)
    for symbol, (code, length) in tables.canonical_codes(bits, vals).items():
        shift = 16 - length
        table[code << shift : (code + 1) << shift] = length << 8 | symbol
    return table.tolist()


def _windows(data: bytes) -> list:
    """16-bit window starting at every bit position of ``data`` (padded with ones)."""
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8)).astype(np.int64)
    bits = np.concatenate([bits, np.ones(48, dtype=np.int64)])
    n = len(bits) - 16
    win = np.zeros(n, dtype=np.int64)
    for k in range(16):
        win |= bits[k : k + n] << (15 - k)
    return win.tolist()


class _Decoder:
    def __init__(self, data: bytes):
        self.data = data
        self.qtables = {}
        self.dc_tables = {}
        self.ac_tables = {}
        self.components = []
        self.width = self.height = 0
        self.hmax = self.vmax = 1
        self.restart_interval = 0
        self.frame_seen = False

    def fail(self, message):
        raise FormatError(f"malformed stream: {message}")

    def run(self) -> LdrImage:
        data = self.data
        if data[:2] != b"\xff\xd8":
            self.fail("missing SOI")
        pos = 2
        while True:
            if pos + 2 > len(data):
                self.fail("missing EOI")
            if data[pos] != 0xFF:
                self.fail(f"expected marker at offset {pos}")
            marker = data[pos + 1]
            if marker == 0xFF:
                pos += 1
                continue
            pos += 2
            if marker == 0xD9:
                break
            if 0xD0 <= marker <= 0xD7 or marker == 0x01:
                continue
            if pos + 2 > len(data):
                self.fail("truncated segment")
            (length,) = struct.unpack_from(">H", data, pos)
            if length < 2 or pos + length > len(data):
                self.fail("segment length out of range")
            payload = data[pos + 2 : pos + length]
            pos += length
            if marker == 0xDB:
                self._dqt(payload)
            elif marker == 0xC4:
                self._dht(payload)
            elif marker in (0xC0, 0xC1):
                self._sof(payload)
            elif 0xC2 <= marker <= 0xCF and marker not in (0xC4, 0xC8, 0xCC):
                kind = "progressive" if marker in (0xC2, 0xC6) else "non-baseline"
                raise FormatError(f"unsupported {kind} JPEG process (SOF{marker - 0xC0})")
            elif marker == 0xCC:
                raise FormatError("arithmetic coding is not supported")
            elif marker == 0xDD:
                if len(payload) != 2:
                    self.fail("bad DRI")
                (self.restart_interval,) = struct.unpack(">H", payload)
            elif marker == 0xDA:
                pos = self._scan(payload, pos)
        if not self.frame_seen:
            self.fail("no frame header")
        return self._output()

    def _dqt(self, payload):
        pos = 0
        while pos < len(payload):
            pq, tq = payload[pos] >> 4, payload[pos] & 15
            size = 128 if pq else 64
            raw = payload[pos + 1 : pos + 1 + size]
            if len(raw) != size or tq > 3:
                self.fail("bad DQT")
            values = np.frombuffer(raw, dtype=">u2" if pq else "u1").astype(np.int64)
            table = np.empty(64, dtype=np.int64)
            table[tables.ZIGZAG] = values
            self.qtables[tq] = table.reshape(8, 8)
            pos += 1 + size

    def _dht(self, payload):
        pos = 0
        while pos < len(payload):
            if pos + 17 > len(payload):
                self.fail("bad DHT")
            tc, th = payload[pos] >> 4, payload[pos] & 15
            bits = tuple(payload[pos + 1 : pos + 17])
            count = sum(bits)
            vals = tuple(payload[pos + 17 : pos + 17 + count])
            if len(vals) != count or tc > 1 or th > 3:
                self.fail("bad DHT")
            (self.ac_tables if tc else self.dc_tables)[th] = _lookup(bits, vals)
            pos += 17 + count

    def _sof(self, payload):
        if self.frame_seen:
            self.fail("multiple frames")
        if len(payload) < 6:
            self.fail("bad SOF")
        precision, height, width, ncomp = struct.unpack_from(">BHHB", payload)
        if precision != 8:
            raise FormatError(f"unsupported sample precision {precision}")
        if width == 0 or height == 0:
            self.fail("zero image dimension")
        if ncomp not in (1, 3) or len(payload) != 6 + 3 * ncomp:
            self.fail("bad SOF component list")
        comps = []
        for k in range(ncomp):
            ident, hv, tq = payload[6 + 3 * k : 9 + 3 * k]
            h, v = hv >> 4, hv & 15
            if not (1 <= h <= 4 and 1 <= v <= 4):
                self.fail("bad sampling factor")
            comps.append(_Component(ident, h, v, tq))
        self.hmax = max(c.h for c in comps)
        self.vmax = max(c.v for c in comps)
        if any(self.hmax % c.h or self.vmax % c.v for c in comps):
            raise FormatError("unsupported non-integral sampling ratio")
        self.mcus_x = _ceil_div(width, 8 * self.hmax)
        self.mcus_y = _ceil_div(height, 8 * self.vmax)
        for c in comps:
            c.blocks_w = self.mcus_x * c.h
            c.blocks_h = self.mcus_y * c.v
            c.coefficients = [0] * (c.blocks_w * c.blocks_h * 64)
        self.width, self.height = width, height
        self.components = comps
        self.frame_seen = True

    def _scan(self, payload, pos):
        if not self.frame_seen:
            self.fail("scan before frame header")
        ns = payload[0] if payload else 0
        if ns < 1 or len(payload) != 4 + 2 * ns:
            self.fail("bad SOS")
        by_id = {c.ident: c for c in self.components}
        scan_comps = []
        for k in range(ns):
            ident, td_ta = payload[1 + 2 * k], payload[2 + 2 * k]
            if ident not in by_id:
                self.fail("scan references unknown component")
            comp = by_id[ident]
            comp.dc_table, comp.ac_table = td_ta >> 4, td_ta & 15
            scan_comps.append(comp)
        ss, se, ahal = payload[1 + 2 * ns : 4 + 2 * ns]
        if ss != 0 or se != 63 or ahal != 0:
            raise FormatError("unsupported spectral selection (progressive scan)")

        # entropy-coded data runs up to the next non-RST marker
        match = _MARKER.search(self.data, pos)
        if match is None:
            self.fail("missing EOI")
        end = match.start()
        segments = re.split(rb"\xff[\xd0-\xd7]", self.data[pos:end])
        segments = [s.replace(b"\xff\x00", b"\xff") for s in segments]

        if ns == 1:
            comp = scan_comps[0]
            width_blocks = _ceil_div(_ceil_div(self.width * comp.h, self.hmax), 8)
            height_blocks = _ceil_div(_ceil_div(self.height * comp.v, self.vmax), 8)
            units = [
                [(comp, by * comp.blocks_w + bx)]
                for by in range(height_blocks)
                for bx in range(width_blocks)
            ]
        else:
            units = []
            for my in range(self.mcus_y):
                for mx in range(self.mcus_x):
                    unit = []
                    for comp in scan_comps:
                        for v in range(comp.v):
                            for h in range(comp.h):
                                index = (my * comp.v + v) * comp.blocks_w + mx * comp.h + h
                                unit.append((comp, index))
                    units.append(unit)

        interval = self.restart_interval or len(units)
        needed = -(-len(units) // interval)
        if len(segments) < needed:
            self.fail("missing restart segment")
        for seg_index in range(needed):
            chunk = units[seg_index * interval : (seg_index + 1) * interval]
            self._decode_segment(segments[seg_index], chunk)
        return end

    def _decode_segment(self, data, units):
        win = _windows(data)
        limit = len(data) * 8 + 16
        pos = 0
        preds = {}
        try:
            for unit in units:
                for comp, index in unit:
                    dct = self.dc_tables[comp.dc_table]
                    act = self.ac_tables[comp.ac_table]
                    out = comp.coefficients
                    base = index * 64

                    entry = dct[win[pos]]
                    if not entry:
                        self.fail("bad Huffman code")
                    pos += entry >> 8
                    s = entry & 255
                    diff = 0
                    if s:
                        diff = win[pos] >> (16 - s)
                        pos += s
                        if diff < 1 << (s - 1):
                            diff -= (1 << s) - 1
                    pred = preds.get(comp.ident, 0) + diff
                    preds[comp.ident] = pred
                    out[base] = pred

                    k = 1
                    while k < 64:
                        entry = act[win[pos]]
                        if not entry:
                            self.fail("bad Huffman code")
                        pos += entry >> 8
                        rs = entry & 255
                        s = rs & 15
                        if s:
                            k += rs >> 4
                            if k > 63:
                                self.fail("AC run past end of block")
                            value = win[pos] >> (16 - s)
                            pos += s
                            if value < 1 << (s - 1):
                                value -= (1 << s) - 1
                            out[base + k] = value
                            k += 1
                        elif rs == 0xF0:
                            k += 16
                        else:
                            break
                    if pos > limit:
                        self.fail("entropy-coded data truncated")
        except KeyError:
            self.fail("scan uses an undefined Huffman table")
        except IndexError:
            self.fail("entropy-coded data truncated")

    def _output(self) -> LdrImage:
        planes = []
        for comp in self.components:
            if comp.tq not in self.qtables:
                self.fail("missing quantisation table")
            zz = np.array(comp.coefficients, dtype=np.int64).reshape(-1, 64)
            natural = zz[:, _UNZIGZAG].reshape(-1, 8, 8) * self.qtables[comp.tq]
            blocks = idct(natural).reshape(comp.blocks_h, comp.blocks_w, 8, 8)
            plane = blocks.swapaxes(1, 2).reshape(comp.blocks_h * 8, comp.blocks_w * 8)
            plane = np.repeat(np.repeat(plane, self.vmax // comp.v, axis=0), self.hmax // comp.h, axis=1)
            planes.append(plane[: self.height, : self.width])
        if len(planes) == 1:
            return LdrImage(np.stack(planes * 3))
        return LdrImage(ycc_to_rgb(planes))


def decode_base(stream: bytes) -> LdrImage:
    """Decode a baseline JPEG stream to 8-bit RGB."""
    return _Decoder(bytes(stream)).run()


def parse_quant_tables(stream: bytes) -> dict:
    """Quantisation tables (natural order, ``8x8``) keyed by destination id."""
    decoder = _Decoder(bytes(stream))
    pos = 2
    data = decoder.data
    while pos + 4 <= len(data) and data[pos] == 0xFF:
        marker = data[pos + 1]
        if marker in (0xD9, 0xDA):
            break
        (length,) = struct.unpack_from(">H", data, pos + 2)
        if marker == 0xDB:
            decoder._dqt(data[pos + 4 : pos + 2 + length])
        pos += 2 + length
    return decoder.qtables
