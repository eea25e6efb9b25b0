import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zsqhdr.pixels import HALF, INTEGER, FloatMapping, HdrImage, LdrImage
from zsqhdr.tonemap import TmoParams, default_params, forward_lut, forward_tmo, inverse_lut, inverse_tmo


def image_of(values, depth=12, mapping=INTEGER):
    values = np.asarray(values).reshape(1, 1, -1)
    return HdrImage(np.repeat(values, 3, axis=0), depth, mapping)


def test_white_point_maps_to_255():
    params = TmoParams(exposure=1.0, gamma=1.0, white_point=1000)
    assert forward_tmo(image_of([1000, 0]), params).planes[0, 0].tolist() == [255, 0]


def test_mid_grey_rounds_half_up():
    # 255 * 100/200 = 127.5 exactly
    params = TmoParams(exposure=1.0, gamma=1.0, white_point=200)
    assert forward_tmo(image_of([100]), params).planes[0, 0, 0] == 128


def test_inverse_endpoints():
    params = TmoParams(exposure=1.0, gamma=1.0, white_point=1000)
    ldr = LdrImage(np.array([255, 0], dtype=np.uint8).reshape(1, 1, 2).repeat(3, axis=0))
    assert inverse_tmo(ldr, params, 12).planes[0, 0].tolist() == [1000, 0]


def test_forward_clamps_above_white():
    params = TmoParams(exposure=2.0, gamma=0.5, white_point=100)
    assert forward_tmo(image_of([4095]), params).planes.max() == 255


def test_invalid_params():
    for kwargs in ({"exposure": 0}, {"gamma": -1}, {"white_point": 0}, {"white_point": 2.5}):
        with pytest.raises(ValueError):
            TmoParams(**kwargs)
    with pytest.raises(ValueError):
        forward_lut(TmoParams(white_point=5000), 12)


params_strategy = st.builds(
    TmoParams,
    exposure=st.floats(0.05, 20.0),
    gamma=st.floats(0.2, 2.5),
    white_point=st.integers(1, 2**12 - 1),
)


@settings(max_examples=60, deadline=None)
@given(params=params_strategy)
def test_forward_is_monotone(params):
    lut = forward_lut(params, 12)
    assert np.all(np.diff(lut.astype(int)) >= 0)


@settings(max_examples=60, deadline=None)
@given(params=params_strategy)
def test_inverse_lands_in_forward_bucket(params):
    depth = 12
    fwd = forward_lut(params, depth)
    inv = inverse_lut(params, depth)
    # brute force: every attained level and the set of samples mapping to it
    for level in np.unique(fwd):
        bucket = np.flatnonzero(fwd == level)
        assert bucket[0] <= inv[level] <= bucket[-1]
    x = np.arange(2**depth)
    assert np.array_equal(fwd[inv[fwd[x]]], fwd[x])


def test_half_mapping_round_trip_is_idempotent():
    params = TmoParams(exposure=1.0, gamma=1 / 2.2, white_point=int(HALF.to_integer(np.array([100.0]))[0]))
    fwd = forward_lut(params, 16, HALF)
    inv = inverse_lut(params, 16, HALF)
    valid = np.arange(0x7C00)
    assert np.array_equal(fwd[inv[fwd[valid]]], fwd[valid])
    assert np.all(np.diff(fwd[valid].astype(int)) >= 0)
    assert inv.max() <= 0x7BFF


def test_linear_of_fixed_mapping_is_sample_itself():
    mapping = FloatMapping("fixed", 8.0)
    params = TmoParams(exposure=1.0, gamma=1.0, white_point=200)
    # same result as the integer mapping: linear(x) == x
    assert np.array_equal(forward_lut(params, 16, mapping), forward_lut(params, 16, INTEGER))


def test_default_params_white_point_is_high_percentile():
    values = np.arange(1, 1001)
    img = HdrImage(np.repeat(values.reshape(1, 10, 100), 3, axis=0), 12)
    params = default_params(img)
    assert params.white_point == 991
    assert default_params(HdrImage(np.zeros((3, 2, 2), dtype=int), 12)).white_point > 0
