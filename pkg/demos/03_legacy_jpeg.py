"""A container is still an ordinary JPEG file.

Run: python3 demos/03_legacy_jpeg.py
Needs Pillow for the third-party decode.
"""

# %% Encode a scene
import io

import numpy as np
from PIL import Image

from zsqhdr import HALF, HdrImage, encode_image
from zsqhdr.container import APP11, demux, segment_map, strip_app11
from zsqhdr.synthetic import scene

radiance = scene("window", 64, 96)
hdr = HdrImage(np.moveaxis(HALF.to_integer(radiance), -1, 0), 16, HALF)
data = encode_image(hdr, 1)

# %% Segment layout: the extension rides in APP11 right after APP0
for marker, offset, length in segment_map(data):
    tag = "extension" if marker == APP11 else ""
    print(f"0xFF{marker:02X} at {offset:5d} length {length:5d} {tag}")

# %% A legacy decoder skips APP11 and shows the tone-mapped picture
with Image.open(io.BytesIO(data)) as im:
    print("legacy decode:", im.format, im.size, im.mode)
    ldr = np.asarray(im.convert("RGB"))
print("LDR mean level:", ldr.mean().round(1))

# %% Dropping every APP11 segment gives back the base stream exactly
assert strip_app11(data) == demux(data).base
print(f"base {len(demux(data).base)} bytes of {len(data)} total")
