import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import scan_codebook
from zsqhdr.zsq import (
    IndexImage,
    build_histogram,
    choose_step_size,
    derive_codebook,
    max_error,
    pack,
    unpack,
)


def histogram_of(values, size=16):
    counts = np.zeros(size, dtype=np.int64)
    for v in values:
        counts[v] += 1
    return counts


def sparse_histogram(rng, depth=12):
    size = 2**depth
    occupied = rng.choice(size, size=int(rng.integers(1, min(200, size) + 1)), replace=False)
    counts = np.zeros(size, dtype=np.int64)
    counts[occupied] = rng.integers(1, 50, size=occupied.size)
    return counts


@pytest.mark.parametrize(
    "delta, parity, epsilon",
    [(1, "odd", 3), (0, "odd", 1), (2, "even", 4), (7, "odd", 15), (14, "odd", 29)],
)
def test_step_size(delta, parity, epsilon):
    assert choose_step_size(delta, parity) == epsilon


def test_step_size_errors():
    with pytest.raises(ValueError):
        choose_step_size(0, "even")
    with pytest.raises(ValueError):
        choose_step_size(-1)
    with pytest.raises(ValueError):
        choose_step_size(1, "both")


@pytest.mark.parametrize("epsilon, delta", [(1, 0), (2, 1), (3, 1), (4, 2), (29, 14), (30, 15)])
def test_max_error(epsilon, delta):
    assert max_error(epsilon) == delta


def test_histogram_counts():
    counts = build_histogram(np.array([5, 5, 7]), 4)
    assert counts[5] == 2 and counts[7] == 1
    assert counts.sum() == 3 and counts.size == 16
    with pytest.raises(ValueError):
        build_histogram(np.array([], dtype=int), 4)
    with pytest.raises(ValueError):
        build_histogram(np.array([16]), 4)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), height=st.integers(1, 40), width=st.integers(1, 40))
def test_histogram_sums_to_sample_count(seed, height, width):
    plane = np.random.default_rng(seed).integers(0, 1024, size=(height, width))
    assert build_histogram(plane, 10).sum() == height * width


def test_worked_example():
    cb = derive_codebook(histogram_of([0, 1, 2, 7, 9]), 3)
    assert list(cb.bins()) == [(0, 2, 2, 1), (7, 9, 9, 8)]
    assert cb.delta == 1
    idx = pack(np.array([[0, 2, 9, 7]]), cb)
    assert idx.indices.tolist() == [[0, 0, 1, 1]]
    assert unpack(IndexImage(np.array([[0, 0, 1, 1]]), 2), cb).tolist() == [[1, 1, 8, 8]]


def test_rep_rounds_half_up():
    cb = derive_codebook(histogram_of([10, 12]), 3)
    assert list(cb.bins()) == [(10, 12, 12, 11)]
    cb = derive_codebook(histogram_of([10, 11]), 4)
    # floor(10.5 + 0.5) = 11
    assert list(cb.bins()) == [(10, 13, 11, 11)]


def test_epsilon_one_is_lossless_packing():
    values = [0, 3, 4, 9, 15]
    cb = derive_codebook(histogram_of(values), 1)
    assert [(s, e, t, r) for s, e, t, r in cb.bins()] == [(v, v, v, v) for v in values]
    plane = np.array([[15, 0], [4, 9]])
    idx = pack(plane, cb)
    assert idx.indices.tolist() == [[4, 0], [2, 3]]
    assert np.array_equal(unpack(idx, cb), plane)


def test_single_value_histogram():
    cb = derive_codebook(histogram_of([6]), 5)
    assert list(cb.bins()) == [(6, 10, 6, 6)]


def test_codebook_errors():
    with pytest.raises(ValueError):
        derive_codebook(np.zeros(8, dtype=int), 3)
    with pytest.raises(ValueError):
        derive_codebook(histogram_of([1]), 0)
    cb = derive_codebook(histogram_of([0, 1, 2, 7, 9]), 3)
    with pytest.raises(ValueError):
        pack(np.array([5]), cb)
    with pytest.raises(ValueError):
        pack(np.array([12]), cb)
    with pytest.raises(ValueError):
        unpack(IndexImage(np.array([[0, 1]]), 3), cb)
    with pytest.raises(ValueError):
        IndexImage(np.array([[0, 2]]), 2)


def test_oracle_equivalence_sample():
    rng = np.random.default_rng(11)
    for _ in range(500):
        counts = sparse_histogram(rng, int(rng.integers(1, 13)))
        epsilon = int(rng.integers(1, 32))
        assert list(derive_codebook(counts, epsilon).bins()) == scan_codebook(counts, epsilon)


@settings(max_examples=100, deadline=None)
@given(
    values=st.lists(st.integers(0, 4095), min_size=1, max_size=300),
    epsilon=st.integers(1, 31),
)
def test_codebook_invariants(values, epsilon):
    counts = np.bincount(values, minlength=4096)
    cb = derive_codebook(counts, epsilon)
    bins = list(cb.bins())
    assert bins == scan_codebook(counts, epsilon)
    previous_end = -1
    for s, e, t, rep in bins:
        assert counts[s] > 0 and counts[t] > 0
        assert s > previous_end
        assert not counts[previous_end + 1 : s].any()
        assert e == s + epsilon - 1
        assert s <= t <= e
        assert rep == int(np.floor((s + t) / 2 + 0.5))
        previous_end = e
    assert np.all(np.diff(cb.reps) > 0)
    # every occupied value lies in exactly one bin and is reproduced within delta
    plane = np.asarray(values)
    idx = pack(plane.reshape(1, -1), cb)
    error = np.abs(unpack(idx, cb).ravel() - plane)
    assert error.max() <= max_error(epsilon)
    # index histogram has no holes
    assert np.all(np.bincount(idx.indices.ravel(), minlength=cb.bin_count) > 0)


def test_error_bound_exhaustive_over_epsilon():
    rng = np.random.default_rng(5)
    for epsilon in range(1, 32):
        for _ in range(20):
            counts = sparse_histogram(rng)
            cb = derive_codebook(counts, epsilon)
            occupied = np.flatnonzero(counts)
            rep = cb.reps[cb.lookup(counts.size)[occupied]]
            assert np.abs(rep - occupied).max() <= epsilon // 2


@settings(max_examples=50, deadline=None)
@given(values=st.lists(st.integers(0, 4095), min_size=1, max_size=200), e1=st.integers(1, 31), e2=st.integers(1, 31))
def test_bin_count_shrinks_as_epsilon_grows(values, e1, e2):
    counts = np.bincount(values, minlength=4096)
    lo, hi = sorted((e1, e2))
    assert derive_codebook(counts, hi).bin_count <= derive_codebook(counts, lo).bin_count


def test_epsilon_one_bijection():
    rng = np.random.default_rng(2)
    plane = rng.choice(rng.choice(4096, 50, replace=False), size=(20, 30))
    cb = derive_codebook(build_histogram(plane, 12), 1)
    idx = pack(plane, cb)
    assert cb.bin_count == np.unique(plane).size
    assert np.array_equal(unpack(idx, cb), plane)
    assert sorted(np.unique(idx.indices)) == list(range(cb.bin_count))
