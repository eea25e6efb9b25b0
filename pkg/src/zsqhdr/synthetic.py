"""Procedural HDR test scenes.

Deterministic given a seed.  The scenes mimic what makes real HDR photographs
hard for a base+residual codec: several decades of dynamic range, small
very bright sources, smooth gradients, sharp edges and sensor-like noise.
"""

from __future__ import annotations

import numpy as np

from .pixels import HALF, FloatMapping, HdrImage

__all__ = ["SCENES", "scene", "random_image"]


def _grid(height, width):
    y, x = np.mgrid[0:height, 0:width].astype(np.float64)
    return y / max(height - 1, 1), x / max(width - 1, 1)


def _smooth_noise(rng, height, width, octaves=4):
    out = np.zeros((height, width))
    for octave in range(octaves):
        cells = 2 ** (octave + 2)
        coarse = rng.standard_normal((cells + 1, cells + 1))
        yi = np.linspace(0, cells, height)
        xi = np.linspace(0, cells, width)
        rows = np.array([np.interp(xi, np.arange(cells + 1), r) for r in coarse])
        full = np.array([np.interp(yi, np.arange(cells + 1), c) for c in rows.T]).T
        out += full / 2**octave
    return out


def _sensor(rng, radiance, level=0.01):
    """Multiplicative shot-like noise plus a tiny additive floor."""
    noisy = radiance * (1.0 + level * rng.standard_normal(radiance.shape))
    return np.maximum(noisy + 1e-4 * rng.standard_normal(radiance.shape), 0.0)


def _window(rng, height, width):
    y, x = _grid(height, width)
    room = 0.05 + 0.4 * (1 - y) * x + 0.05 * _smooth_noise(rng, height, width)
    rgb = np.stack([room * 1.0, room * 0.85, room * 0.7])
    inside = (x > 0.55) & (x < 0.9) & (y > 0.15) & (y < 0.6)
    sky = 200.0 + 600.0 * (1 - y)
    rgb[:, inside] = np.stack([sky * 0.7, sky * 0.85, sky * 1.0])[:, inside]
    frame = inside & ((np.abs(x - 0.725) < 0.01) | (np.abs(y - 0.375) < 0.012))
    rgb[:, frame] = 0.02
    return _sensor(rng, np.maximum(rgb, 0.001))


def _sunset(rng, height, width):
    y, x = _grid(height, width)
    sky = np.exp(4.0 * (1 - y)) * (1 + 0.1 * _smooth_noise(rng, height, width))
    rgb = np.stack([sky * 1.0, sky * 0.6, sky * 0.35])
    sun = np.exp(-((x - 0.3) ** 2 + (y - 0.45) ** 2) / 0.002) * 20000.0
    rgb += np.stack([sun, sun * 0.9, sun * 0.6])
    ground = y > 0.6 + 0.05 * np.sin(9 * x)
    rgb[:, ground] *= 0.002
    return _sensor(rng, rgb)


def _lamps(rng, height, width):
    y, x = _grid(height, width)
    rgb = 0.01 + 0.02 * np.abs(_smooth_noise(rng, height, width))[None] * np.ones((3, 1, 1))
    for _ in range(5):
        cy, cx = rng.uniform(0.1, 0.9, size=2)
        power = 10 ** rng.uniform(1, 3.5)
        tint = rng.uniform(0.4, 1.0, size=3)
        spot = power * np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / rng.uniform(0.0005, 0.01))
        rgb += tint[:, None, None] * spot
    return _sensor(rng, rgb, 0.02)


def _texture(rng, height, width):
    log_radiance = 2.0 * _smooth_noise(rng, height, width, octaves=5)
    tint = 1 + 0.2 * np.stack([_smooth_noise(rng, height, width, 3) for _ in range(3)])
    return _sensor(rng, np.exp(log_radiance)[None] * np.clip(tint, 0.2, None))


def _chart(rng, height, width):
    y, x = _grid(height, width)
    rows, cols = 4, 6
    patch = (np.minimum((y * rows).astype(int), rows - 1) * cols + np.minimum((x * cols).astype(int), cols - 1))
    exposure = 10.0 ** np.linspace(-2, 3, rows * cols)
    colors = rng.uniform(0.2, 1.0, size=(rows * cols, 3))
    rgb = (exposure[:, None] * colors)[patch].transpose(2, 0, 1)
    return _sensor(rng, rgb, 0.005)


SCENES = {
    "window": _window,
    "sunset": _sunset,
    "lamps": _lamps,
    "texture": _texture,
    "chart": _chart,
}


def scene(name: str, height: int = 96, width: int = 128, seed: int = 0) -> np.ndarray:
    """Float radiance of a named scene, shape ``(height, width, 3)``."""
    rng = np.random.default_rng(seed)
    rgb = SCENES[name](rng, height, width)
    return np.moveaxis(rgb, 0, -1).astype(np.float32)


def random_image(rng: np.random.Generator, max_side: int = 40) -> HdrImage:
    """A small random HDR image: random size, integer depth or float mapping,
    and a random mixture of scene content and pure noise."""
    height = int(rng.integers(1, max_side + 1))
    width = int(rng.integers(1, max_side + 1))
    kind = rng.integers(4)
    if kind == 0:
        depth = int(rng.integers(9, 17))
        planes = rng.integers(0, 2**depth, size=(3, height, width))
        return HdrImage(planes, depth)
    if kind == 1:
        # sparse histogram: a handful of widely spaced levels
        depth = int(rng.integers(9, 17))
        levels = rng.choice(2**depth, size=int(rng.integers(1, 40)), replace=False)
        return HdrImage(rng.choice(levels, size=(3, height, width)), depth)
    name = list(SCENES)[int(rng.integers(len(SCENES)))]
    radiance = scene(name, height, width, seed=int(rng.integers(2**31)))
    if kind == 2:
        return HdrImage(np.moveaxis(HALF.to_integer(radiance), -1, 0), 16, HALF)
    mapping = FloatMapping("fixed", scale=float(10 ** rng.uniform(0, 2)))
    return HdrImage(np.moveaxis(mapping.to_integer(radiance), -1, 0), 16, mapping)
