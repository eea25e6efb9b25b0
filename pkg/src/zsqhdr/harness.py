"""File-level encode/decode, distortion and rate measurement, epsilon sweeps."""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .codec import decode_image, encode_base_layer, encode_extension, error_bound
from .container import demux, mux
from .pixels import HALF, FloatMapping, HdrImage, load_hdr, store_hdr
from .zsq import choose_step_size

__all__ = [
    "RdPoint",
    "CSV_COLUMNS",
    "measure",
    "max_abs_error",
    "psnr",
    "encode_file",
    "decode_file",
    "sweep",
    "sweep_image",
    "write_csv",
]

CSV_COLUMNS = (
    "epsilon",
    "delta",
    "q",
    "transform",
    "bpp",
    "max_abs_err",
    "psnr_db",
    "bytes_base",
    "bytes_tables",
    "bytes_payload",
)


@dataclass(frozen=True)
class RdPoint:
    epsilon: int
    delta: int
    q: int
    transform: str
    bits_per_pixel: float
    max_abs_error: int
    psnr_db: float
    bytes_base: int
    bytes_tables: int
    bytes_payload: int

    @property
    def total_bytes(self) -> int:
        return self.bytes_base + self.bytes_tables + self.bytes_payload

    @property
    def bound(self) -> int:
        return error_bound(self.delta, self.transform)

    def row(self) -> dict:
        psnr_text = "inf" if math.isinf(self.psnr_db) else f"{self.psnr_db:.4f}"
        return {
            "epsilon": self.epsilon,
            "delta": self.delta,
            "q": self.q,
            "transform": self.transform,
            "bpp": f"{self.bits_per_pixel:.6f}",
            "max_abs_err": self.max_abs_error,
            "psnr_db": psnr_text,
            "bytes_base": self.bytes_base,
            "bytes_tables": self.bytes_tables,
            "bytes_payload": self.bytes_payload,
        }


def max_abs_error(a: HdrImage, b: HdrImage) -> int:
    return int(np.abs(a.planes.astype(np.int64) - b.planes.astype(np.int64)).max())


def psnr(reference: HdrImage, test: HdrImage) -> float:
    """PSNR in the integer sample domain with peak ``2**depth - 1``."""
    diff = reference.planes.astype(np.float64) - test.planes.astype(np.float64)
    mse = float(np.mean(diff**2))
    if mse == 0:
        return math.inf
    peak = 2**reference.depth - 1
    return 10.0 * math.log10(peak * peak / mse)


def measure(original: HdrImage, data: bytes) -> RdPoint:
    """Rate and distortion of an encoded container, measured by decoding it.

    ``bytes_payload`` counts everything that is neither base stream nor
    table data (index payloads, header and segment overhead), so the three
    byte counts add up to the file size.
    """
    container = demux(data)
    decoded = decode_image(data)
    header = container.header
    bytes_base = len(container.base)
    bytes_tables = sum(len(t) for t in container.tables)
    return RdPoint(
        epsilon=header.epsilon,
        delta=header.delta,
        q=header.quality,
        transform=header.transform,
        bits_per_pixel=8.0 * len(data) / (original.width * original.height),
        max_abs_error=max_abs_error(original, decoded),
        psnr_db=psnr(original, decoded),
        bytes_base=bytes_base,
        bytes_tables=bytes_tables,
        bytes_payload=len(data) - bytes_base - bytes_tables,
    )


def _atomic_write(path, writer) -> None:
    """Write through a temporary file so failures leave no partial output."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=path.suffix)
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def encode_file(
    input_path,
    output_path,
    delta: int = 1,
    parity: str = "odd",
    quality: int = 90,
    transform: str = "rct",
    mapping: FloatMapping = HALF,
    subsampling: str = "444",
    codec: str = "predictive-deflate",
) -> RdPoint:
    hdr = load_hdr(input_path, mapping)
    epsilon = choose_step_size(delta, parity)
    base = encode_base_layer(hdr, quality, subsampling)
    data = mux(encode_extension(hdr, base, epsilon, transform, codec))
    _atomic_write(output_path, lambda tmp: Path(tmp).write_bytes(data))
    return measure(hdr, data)


def decode_file(input_path, output_path) -> HdrImage:
    """Decode a container and write the HDR image; the format follows the
    output suffix (``.ppm``/``.pfm``/``.hdr``)."""
    image = decode_image(Path(input_path).read_bytes())
    _atomic_write(output_path, lambda tmp: store_hdr(image, tmp))
    return image


def sweep_image(
    hdr: HdrImage,
    deltas,
    quality: int = 90,
    transform: str = "rct",
    parity: str = "odd",
    subsampling: str = "444",
    codec: str = "predictive-deflate",
) -> list:
    """One :class:`RdPoint` per step size, ordered by epsilon.  The base layer
    is encoded once and shared by every point."""
    deltas = list(deltas)
    if not deltas:
        raise ValueError("delta range is empty")
    epsilons = sorted({choose_step_size(d, parity) for d in deltas})
    base = encode_base_layer(hdr, quality, subsampling)
    points = []
    for epsilon in epsilons:
        data = mux(encode_extension(hdr, base, epsilon, transform, codec))
        points.append(measure(hdr, data))
    return points


def sweep(
    input_path,
    deltas,
    quality: int = 90,
    transform: str = "rct",
    parity: str = "odd",
    mapping: FloatMapping = HALF,
    csv_path=None,
) -> str:
    """Sweep a file over ``deltas`` and return (and optionally write) the CSV."""
    points = sweep_image(load_hdr(input_path, mapping), deltas, quality, transform, parity)
    text = write_csv(points)
    if csv_path is not None:
        _atomic_write(csv_path, lambda tmp: Path(tmp).write_text(text, newline=""))
    return text


def write_csv(points) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for point in points:
        writer.writerow(point.row())
    return buffer.getvalue()
