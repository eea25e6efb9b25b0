"""Rate control with the single step-size parameter.

Run: python3 demos/04_rate_sweep.py
"""

# %% Sweep delta 0..14 (epsilon 1..29) on one scene, sharing the base layer
import numpy as np

from zsqhdr import HALF, HdrImage
from zsqhdr.harness import sweep_image, write_csv
from zsqhdr.synthetic import scene

radiance = scene("texture", 96, 128)
hdr = HdrImage(np.moveaxis(HALF.to_integer(radiance), -1, 0), 16, HALF)
points = sweep_image(hdr, range(15))

# %% One row per control point
print(write_csv(points))

# %% A crude text plot of bpp against epsilon
top = max(p.bits_per_pixel for p in points)
for p in points:
    bar = "#" * int(50 * p.bits_per_pixel / top)
    print(f"eps={p.epsilon:2d} {p.bits_per_pixel:6.2f} bpp {bar}")

# %% Every point respects its bound, checked by re-decoding
assert all(p.max_abs_error <= p.bound for p in points)
