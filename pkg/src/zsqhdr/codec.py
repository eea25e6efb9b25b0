"""End-to-end two-layer encoder and decoder.

Encoding::

    HDR --TMO--> LDR --JPEG--> base stream --decode--> LDR'
    HDR - inverse_tmo(LDR')  --colour transform, bias--> residual planes
    residual plane --histogram--> codebook --pack--> index plane --lossless--> payload
    codebook reps --DPCM, deflate--> table
    base stream + header + tables + payloads --mux--> container

The base layer does not depend on the step size, so :func:`encode_base_layer`
can be computed once and reused across an epsilon sweep.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basejpeg import decode_base, encode_base
from .container import Container, ContainerHeader, decode_table, demux, encode_table, mux
from .errors import FormatError
from .pixels import FloatMapping, HdrImage, LdrImage
from .residual import (
    ResidualPlanes,
    compute_residual,
    decode_plane,
    encode_plane,
    reconstruct_residual,
)
from .tonemap import TmoParams, default_params, forward_tmo, inverse_tmo
from .zsq import IndexImage, build_histogram, choose_step_size, derive_codebook, max_error, pack

__all__ = [
    "BaseLayer",
    "encode_base_layer",
    "encode_extension",
    "encode_image",
    "decode_image",
    "decode_layers",
    "error_bound",
]


@dataclass(frozen=True)
class BaseLayer:
    stream: bytes
    decoded: LdrImage
    tmo: TmoParams
    quality: int
    subsampling: str


def error_bound(delta: int, transform: str) -> int:
    """Guaranteed per-RGB-sample error for a quantiser bound ``delta``."""
    return delta if transform == "none" else 2 * delta


def encode_base_layer(
    hdr: HdrImage, quality: int = 90, subsampling: str = "444", tmo: TmoParams | None = None
) -> BaseLayer:
    tmo = tmo or default_params(hdr)
    stream = encode_base(forward_tmo(hdr, tmo), quality, subsampling)
    return BaseLayer(stream, decode_base(stream), tmo, quality, subsampling)


def encode_extension(
    hdr: HdrImage,
    base: BaseLayer,
    epsilon: int,
    transform: str = "rct",
    codec: str = "predictive-deflate",
) -> Container:
    residual = compute_residual(hdr, base.decoded, base.tmo, transform)
    tables, payloads = [], []
    for plane in residual.planes:
        depth = max(int(plane.max()).bit_length(), 1)
        codebook = derive_codebook(build_histogram(plane, depth), epsilon)
        tables.append(encode_table(codebook))
        payloads.append(encode_plane(pack(plane, codebook), codec))
    header = ContainerHeader(
        width=hdr.width,
        height=hdr.height,
        depth=hdr.depth,
        mapping=hdr.mapping.mode,
        mapping_scale=float(hdr.mapping.scale),
        exposure=float(base.tmo.exposure),
        gamma=float(base.tmo.gamma),
        white_point=int(base.tmo.white_point),
        transform=transform,
        epsilon=int(epsilon),
        delta=max_error(epsilon),
        quality=base.quality,
        subsampling=base.subsampling,
        biases=residual.biases,
        codecs=(codec,) * 3,
    )
    return Container(base.stream, header, tuple(tables), tuple(payloads))


def encode_image(
    hdr: HdrImage,
    delta: int = 1,
    parity: str = "odd",
    quality: int = 90,
    transform: str = "rct",
    subsampling: str = "444",
    codec: str = "predictive-deflate",
    tmo: TmoParams | None = None,
) -> bytes:
    """Encode ``hdr`` so that every sample decodes within the mode's bound of
    ``delta`` (``delta`` itself without a colour transform, ``2*delta`` with it)."""
    epsilon = choose_step_size(delta, parity)
    base = encode_base_layer(hdr, quality, subsampling, tmo)
    return mux(encode_extension(hdr, base, epsilon, transform, codec))


@dataclass(frozen=True)
class DecodedLayers:
    container: Container
    base: LdrImage
    tmo: TmoParams
    mapping: FloatMapping
    index_images: tuple
    reps: tuple
    image: HdrImage


def decode_layers(data: bytes) -> DecodedLayers:
    """Decode a container and keep every intermediate product."""
    container = demux(data)
    header = container.header
    base = decode_base(container.base)
    if (base.width, base.height) != (header.width, header.height):
        raise FormatError("base layer size disagrees with the extension header")
    tmo = TmoParams(header.exposure, header.gamma, header.white_point)
    mapping = FloatMapping(header.mapping, header.mapping_scale)

    index_images, reps, planes = [], [], []
    for table, payload, codec in zip(container.tables, container.payloads, header.codecs):
        table_reps = decode_table(table)
        index_image = decode_plane(payload, codec)
        if index_image.bin_count != len(table_reps):
            raise FormatError("index plane and unpacking table disagree on bin count")
        if (index_image.width, index_image.height) != (header.width, header.height):
            raise FormatError("index plane size disagrees with the extension header")
        index_images.append(index_image)
        reps.append(table_reps)
        planes.append(table_reps[index_image.indices.astype(np.int64)])

    residual = ResidualPlanes(np.stack(planes), header.biases, header.transform)
    predicted = inverse_tmo(base, tmo, header.depth, mapping)
    samples = predicted.planes.astype(np.int64) + reconstruct_residual(residual)
    # clamping toward the valid range can only reduce the error
    samples = np.clip(samples, 0, mapping.max_sample(header.depth))
    image = HdrImage(samples, header.depth, mapping)
    return DecodedLayers(container, base, tmo, mapping, tuple(index_images), tuple(reps), image)


def decode_image(data: bytes) -> HdrImage:
    return decode_layers(data).image
