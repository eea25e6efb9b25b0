"""Zero-skip quantisation of sparse sample histograms.

A plane of non-negative integers is quantised with a step size ``epsilon``
whose bins only ever start on a value that actually occurs.  Scanning the
occupied values from the bottom, each bin opens at the first occupied value
beyond the previous bin and covers ``epsilon`` consecutive values:

    start[0] = smallest occupied value
    start[q] = smallest occupied value greater than end[q-1]
    end[q]   = start[q] + epsilon - 1
    top[q]   = largest occupied value in [start[q], end[q]]
    rep[q]   = floor((start[q] + top[q]) / 2 + 1/2)

Runs of empty histogram bins therefore cost nothing in the index range, and
with ``epsilon == 1`` the scheme degenerates to plain histogram packing.
Every sample is reconstructed within ``epsilon // 2`` of its value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ZsqCodebook",
    "IndexImage",
    "choose_step_size",
    "max_error",
    "build_histogram",
    "derive_codebook",
    "pack",
    "unpack",
]


def choose_step_size(delta: int, parity: str = "odd") -> int:
    """Quantisation step for a maximum error ``delta``: ``2*delta`` or ``2*delta + 1``."""
    if int(delta) != delta or delta < 0:
        raise ValueError(f"delta must be a non-negative integer, got {delta!r}")
    if parity == "odd":
        return 2 * int(delta) + 1
    if parity == "even":
        if delta == 0:
            raise ValueError("even parity needs delta >= 1 (epsilon would be 0)")
        return 2 * int(delta)
    raise ValueError(f"parity must be 'odd' or 'even', got {parity!r}")


def max_error(epsilon: int) -> int:
    """Largest reconstruction error a step of ``epsilon`` can produce."""
    return int(epsilon) // 2


def build_histogram(plane, depth: int) -> np.ndarray:
    """Occurrence count of every value in ``[0, 2**depth)``."""
    plane = np.asarray(plane)
    if plane.size == 0:
        raise ValueError("cannot build a histogram of an empty plane")
    if plane.min() < 0 or plane.max() >= 2**depth:
        raise ValueError(f"plane values must lie in [0, 2**{depth})")
    return np.bincount(plane.ravel().astype(np.int64), minlength=2**depth)


@dataclass(frozen=True)
class ZsqCodebook:
    """Bins of a zero-skip quantiser; ``reps`` is the unpacking table."""

    starts: np.ndarray
    ends: np.ndarray
    tops: np.ndarray
    reps: np.ndarray
    epsilon: int

    @property
    def delta(self) -> int:
        return max_error(self.epsilon)

    @property
    def bin_count(self) -> int:
        return len(self.starts)

    def bins(self):
        """``(start, end, top, rep)`` tuples in index order."""
        return list(zip(*(a.tolist() for a in (self.starts, self.ends, self.tops, self.reps))))

    def lookup(self, size: int | None = None) -> np.ndarray:
        """Value -> index table; uncovered values map to -1."""
        size = int(self.ends[-1]) + 1 if size is None else size
        table = np.full(size, -1, dtype=np.int64)
        for q, (s, e) in enumerate(zip(self.starts.tolist(), self.ends.tolist())):
            table[s : min(e + 1, size)] = q
        return table

    def __eq__(self, other):
        if not isinstance(other, ZsqCodebook):
            return NotImplemented
        return self.epsilon == other.epsilon and self.bins() == other.bins()

    __hash__ = None


@dataclass(frozen=True)
class IndexImage:
    indices: np.ndarray
    bin_count: int

    def __post_init__(self):
        indices = np.asarray(self.indices)
        if indices.ndim != 2:
            raise ValueError("index image must be two-dimensional")
        if indices.size and (indices.min() < 0 or indices.max() >= self.bin_count):
            raise ValueError("index outside [0, bin_count)")
        object.__setattr__(self, "indices", indices.astype(np.uint32))

    @property
    def height(self) -> int:
        return self.indices.shape[0]

    @property
    def width(self) -> int:
        return self.indices.shape[1]

    def __eq__(self, other):
        if not isinstance(other, IndexImage):
            return NotImplemented
        return self.bin_count == other.bin_count and np.array_equal(self.indices, other.indices)

    __hash__ = None


def derive_codebook(histogram, epsilon: int) -> ZsqCodebook:
    if int(epsilon) != epsilon or epsilon < 1:
        raise ValueError(f"epsilon must be a positive integer, got {epsilon!r}")
    epsilon = int(epsilon)
    occupied = np.flatnonzero(np.asarray(histogram))
    if occupied.size == 0:
        raise ValueError("histogram has no occupied values")

    starts, tops = [], []
    i = 0
    n = len(occupied)
    while i < n:
        start = int(occupied[i])
        # first occupied value beyond this bin's end
        j = int(np.searchsorted(occupied, start + epsilon - 1, side="right"))
        starts.append(start)
        tops.append(int(occupied[j - 1]))
        i = j

    starts = np.array(starts, dtype=np.int64)
    tops = np.array(tops, dtype=np.int64)
    ends = starts + epsilon - 1
    reps = (starts + tops + 1) // 2
    return ZsqCodebook(starts, ends, tops, reps, epsilon)


def pack(plane, codebook: ZsqCodebook) -> IndexImage:
    """Replace every sample by the index of the bin containing it."""
    plane = np.asarray(plane, dtype=np.int64)
    table = codebook.lookup()
    if plane.min() < 0 or plane.max() >= len(table):
        raise ValueError("sample not covered by the codebook")
    indices = table[plane]
    if indices.min() < 0:
        raise ValueError("sample not covered by the codebook")
    return IndexImage(indices, codebook.bin_count)


def unpack(index_image: IndexImage, reps) -> np.ndarray:
    """Map indices back through the unpacking table.

    ``reps`` may be a codebook or a bare representative array (what the
    decoder recovers from a container).
    """
    reps = np.asarray(reps.reps if isinstance(reps, ZsqCodebook) else reps, dtype=np.int64)
    if index_image.bin_count != len(reps):
        raise ValueError(
            f"index image expects {index_image.bin_count} bins, table has {len(reps)}"
        )
    indices = index_image.indices.astype(np.int64)
    if indices.size and indices.max() >= len(reps):
        raise ValueError("index out of range")
    return reps[indices]
