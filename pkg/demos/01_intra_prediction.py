"""
Open-loop intra prediction
==========================

Every CU is first predicted as a whole (the "NP" mode) from the row above
and the column to its left. The predictor tries 35 directions and keeps
the one with the lowest SAD plus a small mode-signalling charge.
"""

from collections import Counter
from pathlib import Path

import numpy as np

from qtmt_ssimv.intra import NUM_MODES, predict_all_modes, predict_np, reference_samples
from qtmt_ssimv.media_io import Plane, Rect, load_pgm

CORPUS = Path(__file__).resolve().parent.parent / "data" / "corpus"
plane = load_pgm(CORPUS / "camera.pgm")
print(f"camera: {plane.width}x{plane.height}, {plane.bit_depth}-bit")

# References for a block in the middle of the image
rect = Rect(96, 64, 16, 16)
top, left = reference_samples(plane, rect)
print("top refs  :", top[:9], "...")
print("left refs :", left[:8], "...")

# All 35 candidates at once, then the chosen one
preds = predict_all_modes(plane, rect)
orig = plane.view(rect).astype(int)
sads = np.abs(preds - orig).sum(axis=(1, 2))
best = predict_np(plane, rect)
print(f"best mode {best.mode_id} with SAD {best.sad}; worst mode SAD {sads.max()}")
assert best.sad == sads.min()

# A block at the image origin has no neighbours, so every reference is mid-grey
corner = predict_np(plane, Rect(0, 0, 8, 8))
print("origin block predicted as", np.unique(corner.samples))

# Which directions win on this image, over an 8x8 grid
wins = Counter(predict_np(plane, Rect(x, y, 8, 8)).mode_id
               for y in range(8, plane.height, 8) for x in range(8, plane.width, 8))
print("most frequent modes:", wins.most_common(5), f"(of {NUM_MODES})")

# Pure vertical content is matched exactly by mode 26
stripes = Plane(np.tile(np.arange(0, 256, 4), (64, 1)))
pb = predict_np(stripes, Rect(16, 16, 16, 16))
print(f"vertical stripes -> mode {pb.mode_id}, SAD {pb.sad}")
