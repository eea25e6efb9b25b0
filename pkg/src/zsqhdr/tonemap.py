"""Global exposure/gamma tone mapping between the HDR domain and 8-bit LDR.

The forward operator is

    ldr = clamp(round(255 * (exposure * linear(x) / linear(white_point)) ** gamma), 0, 255)

with round-half-up.  Both directions are evaluated through lookup tables
built over the whole integer sample range, so results do not depend on the
image content and ``forward(inverse(forward(x))) == forward(x)`` holds
exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pixels import HdrImage, LdrImage, FloatMapping, INTEGER, round_half_up

__all__ = ["TmoParams", "forward_tmo", "inverse_tmo", "default_params", "forward_lut", "inverse_lut"]


@dataclass(frozen=True)
class TmoParams:
    exposure: float = 1.0
    gamma: float = 1.0 / 2.2
    white_point: int = 1

    def __post_init__(self):
        for name in ("exposure", "gamma"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value!r}")
        if int(self.white_point) != self.white_point or self.white_point <= 0:
            raise ValueError(f"white_point must be a positive integer, got {self.white_point!r}")

    def check_depth(self, depth: int) -> None:
        if self.white_point >= 2**depth:
            raise ValueError(f"white_point {self.white_point} does not fit in {depth} bits")


def forward_lut(params: TmoParams, depth: int, mapping: FloatMapping = INTEGER) -> np.ndarray:
    """LDR value for every integer sample in ``[0, 2**depth)``."""
    params.check_depth(depth)
    domain = np.arange(2**depth)
    white = float(mapping.linear(np.array([params.white_point]))[0])
    if white <= 0:
        raise ValueError("white_point maps to zero radiance")
    ratio = params.exposure * mapping.linear(domain) / white
    with np.errstate(over="ignore"):
        scaled = 255.0 * np.power(ratio, params.gamma)
    return np.clip(round_half_up(scaled), 0, 255).astype(np.uint8)


def inverse_lut(params: TmoParams, depth: int, mapping: FloatMapping = INTEGER) -> np.ndarray:
    """HDR sample for each of the 256 LDR levels.

    Level ``v`` maps to the closed-form inverse of the operator, snapped into
    the set of integer samples the forward operator sends to ``v`` when that
    set is non-empty.  Levels the forward operator never produces keep the
    closed-form value.
    """
    fwd = forward_lut(params, depth, mapping)
    levels = np.arange(256, dtype=np.float64)
    white = float(mapping.linear(np.array([params.white_point]))[0])
    linear = white * np.power(levels / 255.0, 1.0 / params.gamma) / params.exposure
    guess = np.clip(mapping.from_linear(linear), 0, mapping.max_sample(depth))
    # the forward table is only monotone over the mapping's valid samples
    fwd_domain = fwd[: mapping.max_sample(depth) + 1]
    lo = np.searchsorted(fwd_domain, np.arange(256), side="left")
    hi = np.searchsorted(fwd_domain, np.arange(256), side="right") - 1
    reachable = lo <= hi
    snapped = np.where(reachable, np.clip(guess, lo, np.maximum(hi, lo)), guess)
    return snapped.astype(np.int64)


def forward_tmo(img: HdrImage, params: TmoParams) -> LdrImage:
    lut = forward_lut(params, img.depth, img.mapping)
    return LdrImage(lut[img.planes])


def inverse_tmo(
    ldr: LdrImage, params: TmoParams, depth: int, mapping: FloatMapping = INTEGER
) -> HdrImage:
    lut = inverse_lut(params, depth, mapping)
    return HdrImage(lut[ldr.planes], depth, mapping)


def default_params(img: HdrImage, percentile: float = 99.0, gamma: float = 1.0 / 2.2) -> TmoParams:
    """Unit exposure with the white point at a high percentile of the per-pixel
    channel maximum."""
    brightest = img.planes.max(axis=0)
    linear = img.mapping.linear(brightest)
    target = np.percentile(linear, percentile)
    # the sample whose linear value is closest to (and not below) the target
    candidates = brightest[linear >= target]
    white = int(candidates.min()) if candidates.size else int(brightest.max())
    if img.mapping.linear(np.array([white]))[0] <= 0:
        positive = brightest[linear > 0]
        white = int(positive.min()) if positive.size else 1
    white = max(white, 1)
    if img.mapping.linear(np.array([white]))[0] <= 0:
        # all-black image; any white point works
        white = 2**img.depth - 1 if img.mapping.mode != "half" else 0x3C00
    return TmoParams(exposure=1.0, gamma=gamma, white_point=white)
