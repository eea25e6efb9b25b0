"""Regenerate the vendored test corpus (deterministic).

    python tests/data/make_corpus.py
"""

from pathlib import Path

import numpy as np

from zsqhdr.pixels import write_pfm, write_pnm, write_rgbe
from zsqhdr.synthetic import scene

HERE = Path(__file__).parent / "corpus"


def main():
    HERE.mkdir(exist_ok=True)
    write_pfm(HERE / "window.pfm", scene("window", 97, 131, seed=1))
    write_rgbe(HERE / "sunset.hdr", scene("sunset", 96, 128, seed=2))
    write_pfm(HERE / "texture.pfm", scene("texture", 128, 128, seed=4))

    lamps = scene("lamps", 64, 80, seed=3)
    write_pnm(HERE / "lamps.ppm", np.clip(np.floor(lamps * 20 + 0.5), 0, 65535), 65535)
    chart = scene("chart", 60, 90, seed=5)
    write_pnm(HERE / "chart.ppm", np.clip(np.floor(chart * 4 + 0.5), 0, 4095), 4095)


if __name__ == "__main__":
    main()
