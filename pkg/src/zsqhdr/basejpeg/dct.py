"""Integer 8x8 DCT and JFIF colour conversion.

The transforms are the accurate integer ("islow") Loeffler-Ligtenberg-
Moschytz factorisation with 13 fractional constant bits and 2 extra bits of
intermediate precision, the definition used by the IJG library.  With the
fixed-point colour conversion below, decoding is bit-reproducible on every
platform and agrees bit for bit with libjpeg's default decoder for 4:4:4
streams.

All functions operate on stacks of blocks shaped ``(..., 8, 8)``.
"""

import numpy as np

CONST_BITS = 13
PASS1_BITS = 2

FIX_0_298631336 = 2446
FIX_0_390180644 = 3196
FIX_0_541196100 = 4433
FIX_0_765366865 = 6270
FIX_0_899976223 = 7373
FIX_1_175875602 = 9633
FIX_1_501321110 = 12299
FIX_1_847759065 = 15137
FIX_1_961570560 = 16069
FIX_2_053119869 = 16819
FIX_2_562915447 = 20995
FIX_3_072711026 = 25172


def _descale(x, n):
    return (x + (1 << (n - 1))) >> n


def _fdct_pass(d, final):
    # d: list of 8 arrays along the transformed axis
    tmp0 = d[0] + d[7]
    tmp7 = d[0] - d[7]
    tmp1 = d[1] + d[6]
    tmp6 = d[1] - d[6]
    tmp2 = d[2] + d[5]
    tmp5 = d[2] - d[5]
    tmp3 = d[3] + d[4]
    tmp4 = d[3] - d[4]

    tmp10 = tmp0 + tmp3
    tmp13 = tmp0 - tmp3
    tmp11 = tmp1 + tmp2
    tmp12 = tmp1 - tmp2

    out = [None] * 8
    if final:
        out[0] = _descale(tmp10 + tmp11, PASS1_BITS)
        out[4] = _descale(tmp10 - tmp11, PASS1_BITS)
        shift = CONST_BITS + PASS1_BITS
    else:
        out[0] = (tmp10 + tmp11) << PASS1_BITS
        out[4] = (tmp10 - tmp11) << PASS1_BITS
        shift = CONST_BITS - PASS1_BITS

    z1 = (tmp12 + tmp13) * FIX_0_541196100
    out[2] = _descale(z1 + tmp13 * FIX_0_765366865, shift)
    out[6] = _descale(z1 - tmp12 * FIX_1_847759065, shift)

    z1 = tmp4 + tmp7
    z2 = tmp5 + tmp6
    z3 = tmp4 + tmp6
    z4 = tmp5 + tmp7
    z5 = (z3 + z4) * FIX_1_175875602

    tmp4 = tmp4 * FIX_0_298631336
    tmp5 = tmp5 * FIX_2_053119869
    tmp6 = tmp6 * FIX_3_072711026
    tmp7 = tmp7 * FIX_1_501321110
    z1 = z1 * -FIX_0_899976223
    z2 = z2 * -FIX_2_562915447
    z3 = z3 * -FIX_1_961570560 + z5
    z4 = z4 * -FIX_0_390180644 + z5

    out[7] = _descale(tmp4 + z1 + z3, shift)
    out[5] = _descale(tmp5 + z2 + z4, shift)
    out[3] = _descale(tmp6 + z2 + z3, shift)
    out[1] = _descale(tmp7 + z1 + z4, shift)
    return out


def fdct(blocks):
    """Forward DCT of level-shifted samples; output is scaled up by 8."""
    blocks = np.asarray(blocks, dtype=np.int64)
    rows = _fdct_pass([blocks[..., k] for k in range(8)], final=False)
    work = np.stack(rows, axis=-1)
    cols = _fdct_pass([work[..., k, :] for k in range(8)], final=True)
    return np.stack(cols, axis=-2)


def _idct_pass(c, shift):
    z2, z3 = c[2], c[6]
    z1 = (z2 + z3) * FIX_0_541196100
    tmp2 = z1 - z3 * FIX_1_847759065
    tmp3 = z1 + z2 * FIX_0_765366865

    tmp0 = (c[0] + c[4]) << CONST_BITS
    tmp1 = (c[0] - c[4]) << CONST_BITS

    tmp10 = tmp0 + tmp3
    tmp13 = tmp0 - tmp3
    tmp11 = tmp1 + tmp2
    tmp12 = tmp1 - tmp2

    tmp0, tmp1, tmp2, tmp3 = c[7], c[5], c[3], c[1]
    z1 = tmp0 + tmp3
    z2 = tmp1 + tmp2
    z3 = tmp0 + tmp2
    z4 = tmp1 + tmp3
    z5 = (z3 + z4) * FIX_1_175875602

    tmp0 = tmp0 * FIX_0_298631336
    tmp1 = tmp1 * FIX_2_053119869
    tmp2 = tmp2 * FIX_3_072711026
    tmp3 = tmp3 * FIX_1_501321110
    z1 = z1 * -FIX_0_899976223
    z2 = z2 * -FIX_2_562915447
    z3 = z3 * -FIX_1_961570560 + z5
    z4 = z4 * -FIX_0_390180644 + z5

    tmp0 = tmp0 + z1 + z3
    tmp1 = tmp1 + z2 + z4
    tmp2 = tmp2 + z2 + z3
    tmp3 = tmp3 + z1 + z4

    return [
        _descale(tmp10 + tmp3, shift),
        _descale(tmp11 + tmp2, shift),
        _descale(tmp12 + tmp1, shift),
        _descale(tmp13 + tmp0, shift),
        _descale(tmp13 - tmp0, shift),
        _descale(tmp12 - tmp1, shift),
        _descale(tmp11 - tmp2, shift),
        _descale(tmp10 - tmp3, shift),
    ]


def idct(coefficients):
    """Inverse DCT of dequantised coefficients to 8-bit samples (level shift
    and clamping included)."""
    coefficients = np.asarray(coefficients, dtype=np.int64)
    cols = _idct_pass([coefficients[..., k, :] for k in range(8)], CONST_BITS - PASS1_BITS)
    work = np.stack(cols, axis=-2)
    rows = _idct_pass([work[..., k] for k in range(8)], CONST_BITS + PASS1_BITS + 3)
    samples = np.stack(rows, axis=-1) + 128
    return np.clip(samples, 0, 255).astype(np.uint8)


def quantize(coefficients, table):
    """Divide scaled DCT output by ``8 * table`` rounding half away from zero."""
    divisor = np.asarray(table, dtype=np.int64).reshape(8, 8) << 3
    magnitude = (np.abs(coefficients) + (divisor >> 1)) // divisor
    return np.where(coefficients < 0, -magnitude, magnitude)


# ---------------------------------------------------------------------------
# JFIF colour conversion, 16 fractional bits


SCALEBITS = 16
ONE_HALF = 1 << (SCALEBITS - 1)


def _fix(x):
    return int(x * (1 << SCALEBITS) + 0.5)


def rgb_to_ycc(rgb):
    """``(3, H, W)`` RGB planes to YCbCr planes."""
    r, g, b = (np.asarray(p, dtype=np.int64) for p in rgb)
    offset = (128 << SCALEBITS) + ONE_HALF - 1
    y = (_fix(0.299) * r + _fix(0.587) * g + _fix(0.114) * b + ONE_HALF) >> SCALEBITS
    cb = (-_fix(0.16874) * r - _fix(0.33126) * g + _fix(0.5) * b + offset) >> SCALEBITS
    cr = (_fix(0.5) * r - _fix(0.41869) * g - _fix(0.08131) * b + offset) >> SCALEBITS
    return np.stack([y, cb, cr]).astype(np.uint8)


def ycc_to_rgb(ycc):
    y, cb, cr = (np.asarray(p, dtype=np.int64) for p in ycc)
    cb = cb - 128
    cr = cr - 128
    r = y + ((_fix(1.40200) * cr + ONE_HALF) >> SCALEBITS)
    g = y + ((-_fix(0.34414) * cb - _fix(0.71414) * cr + ONE_HALF) >> SCALEBITS)
    b = y + ((_fix(1.77200) * cb + ONE_HALF) >> SCALEBITS)
    return np.clip(np.stack([r, g, b]), 0, 255).astype(np.uint8)
