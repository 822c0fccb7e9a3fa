"""
Sub-CU SSIM statistics per split region
=======================================

On every 32x32 CU the unsplit prediction is scored on each 4x4 block, and
the block scores are grouped by the regions each split mode would create.
On natural images the regions have similar means with wide spreads, which
is why the variation between regions, not their level, is informative.
"""

from pathlib import Path

import numpy as np

from qtmt_ssimv.experiment import analyze_regions, region_statistics
from qtmt_ssimv.media_io import Plane, load_pgm

CORPUS = Path(__file__).resolve().parent.parent / "data" / "corpus"
planes = [load_pgm(p) for p in sorted(CORPUS.glob("*.pgm"))]

for row in region_statistics(analyze_regions(planes)):
    print(f"{row['region']:5s} mean {row['mean']:.4f}  std {row['std']:.4f}  n={row['count']}")

# A constructed case: noise in the top quarter of every CU, flat elsewhere
rng = np.random.default_rng(0)
arr = np.full((64, 64), 120)
for y in (0, 32):
    arr[y:y + 8] = rng.integers(0, 256, (8, 64))
stats = {r["region"]: r["mean"] for r in region_statistics(analyze_regions([Plane(arr)]))}
print("noisy top quarter:", {k: round(stats[k], 3) for k in ("TTH1", "TTH2", "TTH3")})
