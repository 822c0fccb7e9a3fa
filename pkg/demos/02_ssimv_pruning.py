"""
SSIM variation and the split-skip decision
==========================================

The prediction of the unsplit CU is compared with the original using a
Gaussian-windowed SSIM on each sub-region of every candidate split. When
the regions of a split are predicted with very different quality, that
split is likely worth testing. The lowest-scoring half of the multi-type
splits is skipped; QT and NP are always kept.
"""

from pathlib import Path

from qtmt_ssimv.intra import predict_np
from qtmt_ssimv.media_io import Rect, load_pgm
from qtmt_ssimv.policy import select_modes
from qtmt_ssimv.search import CuContext, SearchConfig, permitted_modes
from qtmt_ssimv.ssim import ssim_sub_cu
from qtmt_ssimv.ssimv import compute_ssimv, sub_cu_layout

CORPUS = Path(__file__).resolve().parent.parent / "data" / "corpus"
plane = load_pgm(CORPUS / "astronaut.pgm")

cu = CuContext(Rect(96, 96, 32, 32), qt_depth=1)
permitted = permitted_modes(cu, SearchConfig())
pred = predict_np(plane, cu.rect)
print(f"CU {cu.rect}, permitted splits: {sorted(m.name for m in permitted)}")

ssimv = compute_ssimv(plane, pred, permitted)
for mode in sorted(permitted):
    regions = sub_cu_layout(mode, cu.rect).regions
    scores = ", ".join(f"{s:.3f}" for s in ssimv.region_ssim[mode])
    print(f"  {mode.name:3s} regions [{scores}] -> SSIMV {ssimv[mode]:.4f}")

# The same region scores come from evaluating each region on its own
r0 = sub_cu_layout(min(permitted), cu.rect).regions[0]
print(f"  direct SSIM of first region: {ssim_sub_cu(plane, pred, r0):.3f}")

decision = select_modes(permitted, ssimv)
print("ranking :", [m.name for m in decision.ranking])
print("tested  :", [m.name for m in decision.tested])
print("skipped :", [m.name for m in decision.skipped])

# The printed form of the formula is available for comparison
literal = compute_ssimv(plane, pred, permitted, variant="paper-literal")
print("printed-formula SSIMV:", {m.name: round(v, 4) for m, v in literal.values.items()})
