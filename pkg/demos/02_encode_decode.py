"""Two-layer encoding of a synthetic HDR scene and the error bound.

Run: python3 demos/02_encode_decode.py
"""

# %% Make a float HDR scene and map it to 16-bit half-float patterns
import numpy as np

from zsqhdr import HALF, HdrImage, decode_layers, encode_image, error_bound
from zsqhdr.synthetic import scene

radiance = scene("sunset", 96, 128)
print(f"radiance range {radiance.min():.4g} .. {radiance.max():.4g}")
hdr = HdrImage(np.moveaxis(HALF.to_integer(radiance), -1, 0), 16, HALF)

# %% Encode at a few error bounds, with and without the colour transform
for transform in ("none", "rct"):
    for delta in (0, 1, 4, 15):
        data = encode_image(hdr, delta, transform=transform)
        layers = decode_layers(data)
        err = int(np.abs(layers.image.planes.astype(int) - hdr.planes).max())
        bpp = 8 * len(data) / (hdr.width * hdr.height)
        print(
            f"{transform:4s} delta={delta:2d}: {len(data):6d} bytes ({bpp:5.2f} bpp), "
            f"max error {err} (bound {error_bound(delta, transform)})"
        )

# %% What the decoder sees: base LDR image plus packed index planes
layers = decode_layers(encode_image(hdr, 2))
print("base layer:", layers.base.planes.shape, layers.base.planes.dtype)
print("tone curve:", layers.tmo)
for k, (idx, reps) in enumerate(zip(layers.index_images, layers.reps)):
    print(f"plane {k}: {idx.bin_count} bins, reps {reps[:4].tolist()} ...")

# %% delta=0 is lossless
assert decode_layers(encode_image(hdr, 0)).image == hdr
print("delta=0 round trip is bit-identical")
