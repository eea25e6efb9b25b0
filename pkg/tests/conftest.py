from pathlib import Path

import numpy as np
import pytest

from zsqhdr import load_hdr
from zsqhdr.synthetic import random_image

CORPUS_DIR = Path(__file__).parent / "data" / "corpus"
CORPUS_FILES = sorted(p for p in CORPUS_DIR.iterdir() if p.suffix in {".pfm", ".hdr", ".ppm"})


@pytest.fixture(scope="session")
def corpus():
    """Vendored corpus images keyed by file name."""
    return {path.name: load_hdr(path) for path in CORPUS_FILES}


@pytest.fixture(scope="session")
def synthetic_images():
    rng = np.random.default_rng(20240611)
    return [random_image(rng) for _ in range(50)]


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
