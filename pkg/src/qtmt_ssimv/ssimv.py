"""SSIM variation (SSIMV) of a CU under each candidate split mode.

A split mode whose sub-regions are predicted with very different fidelity
gets a large SSIMV; a split that leaves every part equally well (or badly)
predicted gets a small one.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .intra import PredictedBlock
from .media_io import Plane, Rect
from .ssim import DEFAULT_SIGMA, SsimParams, ssim_map, window_for


class SplitMode(enum.IntEnum):
    NP = 0
    QT = 1
    BTH = 2
    BTV = 3
    TTH = 4
    TTV = 5

    def __str__(self) -> str:
        return self.name


SPLIT_MODES = (SplitMode.QT, SplitMode.BTH, SplitMode.BTV, SplitMode.TTH, SplitMode.TTV)
MT_MODES = (SplitMode.BTH, SplitMode.BTV, SplitMode.TTH, SplitMode.TTV)


@dataclass(frozen=True)
class SubCuLayout:
    mode: SplitMode
    regions: tuple[Rect, ...]


def sub_cu_layout(mode: SplitMode, cu: Rect) -> SubCuLayout:
    """Measurement regions for ``mode``.

    QT gives quadrants a1 (TL), a2 (TR), a3 (BL), a4 (BR). BT gives two
    halves. TT gives four equal quarter strips c1..c4, so the middle coding
    sub-CU is measured as the pair c2, c3.
    """
    x, y, w, h = cu.x, cu.y, cu.w, cu.h
    if mode == SplitMode.QT:
        if w % 2 or h % 2:
            raise ValueError(f"QT needs even dimensions, got {w}x{h}")
        hw, hh = w // 2, h // 2
        regions = (Rect(x, y, hw, hh), Rect(x + hw, y, hw, hh),
                   Rect(x, y + hh, hw, hh), Rect(x + hw, y + hh, hw, hh))
    elif mode == SplitMode.BTH:
        if h % 2:
            raise ValueError(f"BTH needs even height, got {h}")
        regions = (Rect(x, y, w, h // 2), Rect(x, y + h // 2, w, h // 2))
    elif mode == SplitMode.BTV:
        if w % 2:
            raise ValueError(f"BTV needs even width, got {w}")
        regions = (Rect(x, y, w // 2, h), Rect(x + w // 2, y, w // 2, h))
    elif mode == SplitMode.TTH:
        if h % 4:
            raise ValueError(f"TTH needs height divisible by 4, got {h}")
        q = h // 4
        regions = tuple(Rect(x, y + i * q, w, q) for i in range(4))
    elif mode == SplitMode.TTV:
        if w % 4:
            raise ValueError(f"TTV needs width divisible by 4, got {w}")
        q = w // 4
        regions = tuple(Rect(x + i * q, y, q, h) for i in range(4))
    else:
        raise ValueError(f"no sub-CU layout for {mode!r}")
    return SubCuLayout(mode, regions)


def qt_diffs(s: Sequence[float]) -> tuple[float, float, float, float]:
    """Differences between edge-adjacent quadrants (diagonals excluded)."""
    a1, a2, a3, a4 = s
    return abs(a1 - a2), abs(a1 - a3), abs(a2 - a4), abs(a3 - a4)


def tt_diffs(s: Sequence[float]) -> tuple[float, float, float]:
    c1, c2, c3, c4 = s
    return abs(c1 - c2), abs(c1 + c4 - c2 - c3), abs(c3 - c4)


def v_qt(s: Sequence[float]) -> float:
    return sum(qt_diffs(s)) / 4


def v_bt(s: Sequence[float]) -> float:
    b1, b2 = s
    return abs(b1 - b2)


def v_tt(s: Sequence[float]) -> float:
    # three terms over four: kept as-is, it shifts TT against QT/BT ranking
    return sum(tt_diffs(s)) / 4


_V_FUNCS = {
    SplitMode.QT: v_qt,
    SplitMode.BTH: v_bt, SplitMode.BTV: v_bt,
    SplitMode.TTH: v_tt, SplitMode.TTV: v_tt,
}


@dataclass
class SsimvResult:
    values: dict[SplitMode, float] = field(default_factory=dict)
    region_ssim: dict[SplitMode, tuple[float, ...]] = field(default_factory=dict)

    def __getitem__(self, mode: SplitMode) -> float:
        return self.values[mode]

    def __contains__(self, mode) -> bool:
        return mode in self.values

    def diffs(self, mode: SplitMode) -> tuple[float, ...]:
        """D_A1..D_A4 for QT, D_C1..D_C3 for TT, the single |b1-b2| for BT."""
        s = self.region_ssim[mode]
        if mode == SplitMode.QT:
            return qt_diffs(s)
        if mode in (SplitMode.TTH, SplitMode.TTV):
            return tt_diffs(s)
        return (v_bt(s),)

    def as_dict(self) -> dict:
        return {
            "values": {m.name: v for m, v in self.values.items()},
            "region_ssim": {m.name: list(s) for m, s in self.region_ssim.items()},
        }


def compute_ssimv(plane: Plane, pred: PredictedBlock, permitted: Iterable[SplitMode], *,
                  variant: str = "standard", sigmas: dict[int, float] | None = None) -> SsimvResult:
    """SSIMV for each permitted split mode of the CU predicted by ``pred``.

    Region scores equal ``ssim_sub_cu`` on each region. One local-SSIM map
    per window size is computed over the whole CU and each region averages
    the window positions lying entirely inside it, so no window straddles a
    region boundary.
    """
    cu = pred.rect
    orig = plane.view(cu)
    maps: dict[int, np.ndarray] = {}
    result = SsimvResult()
    for mode in sorted(set(permitted)):
        if mode == SplitMode.NP:
            raise ValueError("NP has no SSIMV")
        scores = []
        for r in sub_cu_layout(mode, cu).regions:
            if r.w < 4 or r.h < 4:
                raise ValueError(f"sub-CU {r.w}x{r.h} smaller than 4x4")
            k = window_for(r)
            if k not in maps:
                sigma = (sigmas or DEFAULT_SIGMA).get(k, DEFAULT_SIGMA[k])
                maps[k] = ssim_map(orig, pred.samples,
                                   SsimParams(plane.bit_depth, k, sigma, variant=variant))
            dx, dy = r.x - cu.x, r.y - cu.y
            scores.append(float(maps[k][dy:dy + r.h - k + 1, dx:dx + r.w - k + 1].mean()))
        result.region_ssim[mode] = tuple(scores)
        result.values[mode] = _V_FUNCS[mode](result.region_ssim[mode])
    return result
