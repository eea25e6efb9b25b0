"""Zero-skip quantization on a small sparse histogram.

Run: python3 demos/01_zero_skip_quantization.py
"""

# %% A sparse plane: only five distinct values occur
import numpy as np

from zsqhdr.zsq import build_histogram, choose_step_size, derive_codebook, max_error, pack, unpack

plane = np.array([[0, 1, 2, 7], [9, 9, 2, 0]])
hist = build_histogram(plane, depth=4)
print("occupied values:", np.flatnonzero(hist).tolist())

# %% delta=1 with odd parity gives step size 3
eps = choose_step_size(1, "odd")
cb = derive_codebook(hist, eps)
print(f"epsilon={eps}, guaranteed max error={max_error(eps)}")
for q, (s, e, t, rep) in enumerate(cb.bins()):
    print(f"  bin {q}: start={s} end={e} top={t} rep={rep}")

# %% Bins start on occupied values, so the empty range 3..6 costs no index
idx = pack(plane, cb)
print("index image:\n", idx.indices)
restored = unpack(idx, cb)
print("unpacked:\n", restored)
print("max error:", int(np.abs(restored - plane).max()))

# %% Step size 1 is plain histogram packing and is lossless
cb1 = derive_codebook(hist, 1)
print("epsilon=1 reps:", cb1.reps.tolist())
assert np.array_equal(unpack(pack(plane, cb1), cb1), plane)

# %% Larger steps never add bins
for eps in (1, 3, 5, 9, 15):
    print(f"epsilon={eps:2d}: {derive_codebook(hist, eps).bin_count} bins")
