import io
import math
import subprocess
import sys

import numpy as np
import pytest
from PIL import Image

from zsqhdr import load_hdr
from zsqhdr.cli import main
from zsqhdr.container import APP11, demux, segment_map, strip_app11
from zsqhdr.harness import CSV_COLUMNS, decode_file, encode_file, psnr, sweep
from zsqhdr.pixels import HdrImage, write_pnm

from conftest import CORPUS_DIR


@pytest.fixture
def ppm(tmp_path):
    rng = np.random.default_rng(4)
    y, x = np.mgrid[0:24, 0:32]
    img = (x * 90 + y * 40)[..., None] * np.array([1.0, 0.8, 0.6]) + rng.integers(0, 40, size=(24, 32, 3))
    path = tmp_path / "in.ppm"
    write_pnm(path, img.astype(int), 4095)
    return path


def test_lossless_file_round_trip(ppm, tmp_path):
    point = encode_file(ppm, tmp_path / "a.jpg", delta=0)
    assert point.max_abs_error == 0 and math.isinf(point.psnr_db)
    decode_file(tmp_path / "a.jpg", tmp_path / "b.ppm")
    assert (tmp_path / "b.ppm").read_bytes() == ppm.read_bytes()


def test_delta_one_without_transform(ppm, tmp_path):
    point = encode_file(ppm, tmp_path / "a.jpg", delta=1, transform="none")
    assert point.max_abs_error <= 1
    assert point.bound == 1


def test_byte_split_matches_file_sections(ppm, tmp_path):
    out = tmp_path / "a.jpg"
    point = encode_file(ppm, out, delta=2)
    data = out.read_bytes()
    container = demux(data)
    assert point.bytes_base == len(container.base)
    assert point.bytes_tables == sum(map(len, container.tables))
    assert point.total_bytes == len(data)
    assert point.bytes_payload >= sum(map(len, container.payloads))
    assert point.bits_per_pixel == pytest.approx(8 * len(data) / (24 * 32))


def test_stripped_file_is_a_valid_ldr_jpeg(ppm, tmp_path):
    out = tmp_path / "a.jpg"
    encode_file(ppm, out, delta=3)
    stripped = strip_app11(out.read_bytes())
    with Image.open(io.BytesIO(stripped)) as im:
        assert im.size == (32, 24) and im.mode == "RGB"
        im.load()


def test_psnr():
    a = HdrImage(np.zeros((3, 2, 2), dtype=int), 10)
    b = HdrImage(np.ones((3, 2, 2), dtype=int), 10)
    assert psnr(a, b) == pytest.approx(20 * math.log10(1023))
    assert math.isinf(psnr(a, a))


def test_sweep_rows(ppm):
    text = sweep(ppm, range(15))
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    rows = [dict(zip(CSV_COLUMNS, line.split(","))) for line in lines[1:]]
    assert [int(r["epsilon"]) for r in rows] == list(range(1, 30, 2))
    for row in rows:
        bound = 2 * int(row["delta"]) if row["transform"] == "rct" else int(row["delta"])
        assert int(row["max_abs_err"]) <= bound
    assert text == sweep(ppm, range(15))


def test_sweep_rejects_empty_range(ppm):
    with pytest.raises(ValueError):
        sweep(ppm, [])


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "zsqhdr", *map(str, args)], capture_output=True, text=True)


def test_cli_encode_decode_inspect(ppm, tmp_path):
    result = run_cli("encode", ppm, tmp_path / "a.jpg", "--delta", "2", "--no-ct")
    assert result.returncode == 0, result.stderr
    assert "max_abs_err=" in result.stdout
    assert run_cli("decode", tmp_path / "a.jpg", tmp_path / "b.ppm").returncode == 0
    original, decoded = load_hdr(ppm), load_hdr(tmp_path / "b.ppm")
    assert np.abs(original.planes.astype(int) - decoded.planes).max() <= 2
    result = run_cli("inspect", tmp_path / "a.jpg")
    assert result.returncode == 0
    assert "epsilon: 5" in result.stdout and "(extension)" in result.stdout


def test_cli_sweep_csv(ppm, tmp_path):
    assert main(["sweep", str(ppm), "--deltas", "0:3", "--csv", str(tmp_path / "rd.csv")]) == 0
    assert len((tmp_path / "rd.csv").read_text().splitlines()) == 5
    assert main(["sweep", str(ppm), "--deltas", "1,2", "--parity", "even", "--csv", str(tmp_path / "e.csv")]) == 0
    assert [l.split(",")[0] for l in (tmp_path / "e.csv").read_text().splitlines()[1:]] == ["2", "4"]


def test_cli_float_input(tmp_path):
    out = tmp_path / "w.jpg"
    assert main(["encode", str(CORPUS_DIR / "window.pfm"), str(out), "--delta", "0"]) == 0
    assert main(["decode", str(out), str(tmp_path / "w.pfm")]) == 0
    assert load_hdr(tmp_path / "w.pfm") == load_hdr(CORPUS_DIR / "window.pfm")
    assert main(["encode", str(CORPUS_DIR / "sunset.hdr"), str(out), "--mapping", "fixed", "--scale", "10"]) == 0


def test_cli_usage_errors(ppm, tmp_path):
    assert run_cli().returncode == 1
    assert run_cli("encode", ppm).returncode == 1
    assert run_cli("encode", ppm, tmp_path / "x.jpg", "--delta", "0", "--parity", "even").returncode == 1
    assert run_cli("encode", ppm, tmp_path / "x.jpg", "--quality", "0").returncode == 1
    assert run_cli("encode", tmp_path / "missing.ppm", tmp_path / "x.jpg").returncode == 1
    assert run_cli("sweep", ppm, "--deltas", "-1:3").returncode == 1


def test_cli_format_errors(ppm, tmp_path):
    (tmp_path / "junk.ppm").write_bytes(b"hello")
    assert run_cli("encode", tmp_path / "junk.ppm", tmp_path / "x.jpg").returncode == 2
    plain = tmp_path / "plain.jpg"
    Image.new("RGB", (8, 8)).save(plain)
    result = run_cli("decode", plain, tmp_path / "x.ppm")
    assert result.returncode == 2
    assert not (tmp_path / "x.ppm").exists()


def test_corrupted_checksum_leaves_no_output(ppm, tmp_path):
    out = tmp_path / "a.jpg"
    encode_file(ppm, out, delta=1)
    data = bytearray(out.read_bytes())
    marker, offset, length = [s for s in segment_map(bytes(data)) if s[0] == APP11][-1]
    data[offset + length - 1] ^= 0xFF
    out.write_bytes(bytes(data))
    result = run_cli("decode", out, tmp_path / "b.ppm")
    assert result.returncode == 3
    assert "checksum" in result.stderr
    assert not (tmp_path / "b.ppm").exists()
    assert not any(p.name.startswith(".b.ppm") for p in tmp_path.iterdir())
