"""Open-loop intra prediction with 35 HEVC-style modes.

Mode 0 is Planar, 1 is DC and 2..34 are angular (10 = pure horizontal,
26 = pure vertical). References come from original samples, there is no
reconstruction loop. Angular modes interpolate between reference samples
at 1/32 sample precision. No reference smoothing or boundary filtering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .media_io import Plane, Rect

PLANAR = 0
DC = 1
HORIZONTAL = 10
VERTICAL = 26
NUM_MODES = 35

# intraPredAngle in 1/32 sample units for modes 2..34
INTRA_PRED_ANGLE = (
    32, 26, 21, 17, 13, 9, 5, 2, 0, -2, -5, -9, -13, -17, -21, -26,
    -32, -26, -21, -17, -13, -9, -5, -2, 0, 2, 5, 9, 13, 17, 21, 26, 32,
)
INV_ANGLE = {-2: -4096, -5: -1638, -9: -910, -13: -630,
             -17: -482, -21: -390, -26: -315, -32: -256}

MODE_BITS = math.ceil(math.log2(NUM_MODES))
SAD_MODE_WEIGHT = 4


@dataclass(frozen=True, eq=False)
class PredictedBlock:
    rect: Rect
    samples: np.ndarray  # (h, w) int32
    mode_id: int
    mode_bits: int = MODE_BITS
    sad: int = 0


def reference_samples(plane: Plane, rect: Rect) -> tuple[np.ndarray, np.ndarray]:
    """Top (2w+1, corner first) and left (2h) reference arrays for ``rect``.

    Each array is filled independently: samples outside the plane copy the
    nearest in-plane entry of the same array, and an array with no in-plane
    entry is set to mid-range.
    """
    if rect.x1 > plane.width or rect.y1 > plane.height:
        raise ValueError(f"{rect} exceeds {plane.width}x{plane.height} plane")
    mid = 1 << (plane.bit_depth - 1)
    s = plane.samples

    top = np.full(2 * rect.w + 1, mid, dtype=np.int32)
    if rect.y > 0:
        x0, x1 = max(rect.x - 1, 0), min(rect.x + 2 * rect.w, plane.width)
        lo = x0 - (rect.x - 1)
        top[lo:lo + x1 - x0] = s[rect.y - 1, x0:x1]
        top[:lo] = top[lo]
        top[lo + x1 - x0:] = top[lo + x1 - x0 - 1]

    left = np.full(2 * rect.h, mid, dtype=np.int32)
    if rect.x > 0:
        n = min(rect.y + 2 * rect.h, plane.height) - rect.y
        left[:n] = s[rect.y:rect.y + n, rect.x - 1]
        left[n:] = left[n - 1]
    return top, left


def _extended_refs(top: np.ndarray, left: np.ndarray, w: int, h: int) -> np.ndarray:
    """Pack [corner, top..., left...] with each side padded to 2(w+h)."""
    n = 2 * (w + h)
    out = np.empty(1 + 2 * n, dtype=np.int32)
    out[0] = top[0]
    nt = len(top) - 1
    out[1:1 + nt] = top[1:]
    out[1 + nt:1 + n] = top[-1]
    out[1 + n:1 + n + len(left)] = left
    out[1 + n + len(left):] = left[-1]
    return out


@lru_cache(maxsize=None)
def _planar_weights(w: int, h: int) -> tuple[np.ndarray, ...]:
    ys, xs = np.mgrid[0:h, 0:w]
    out = (h - 1 - ys, ys + 1, w - 1 - xs, xs + 1)
    for a in out:
        a.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _angular_tables(w: int, h: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gather indices into the packed reference vector and 1/32 weights.

    Returns ``(idx0, idx1, frac)`` each shaped ``(33, h, w)``.
    """
    n = 2 * (w + h)
    top_base, left_base = 1, 1 + n
    ys, xs = np.mgrid[0:h, 0:w]
    idx0 = np.empty((33, h, w), dtype=np.intp)
    idx1 = np.empty_like(idx0)
    frac = np.empty((33, h, w), dtype=np.int32)

    for m in range(2, NUM_MODES):
        angle = INTRA_PRED_ANGLE[m - 2]
        vertical = m >= 18
        # main runs along the top for vertical modes, down the left otherwise
        along, across = (xs, ys) if vertical else (ys, xs)
        main_base, side_base = (top_base, left_base) if vertical else (left_base, top_base)
        pos = (across + 1) * angle
        k0 = along + (pos >> 5) + 1

        def to_index(k):
            out = np.where(k > 0, main_base + np.minimum(k - 1, n - 1), 0)
            if angle < 0:
                proj = ((k * INV_ANGLE[angle] + 128) >> 8) - 1
                side = np.where(proj < 0, 0, side_base + np.minimum(proj, n - 1))
                out = np.where(k < 0, side, out)
            return out

        idx0[m - 2] = to_index(k0)
        idx1[m - 2] = to_index(k0 + 1)
        frac[m - 2] = pos & 31
    for a in (idx0, idx1, frac):
        a.setflags(write=False)
    return idx0, idx1, frac


def predict_all_modes(plane: Plane, rect: Rect) -> np.ndarray:
    """Predictions for every mode, shaped ``(35, h, w)``, int32."""
    w, h = rect.w, rect.h
    top, left = reference_samples(plane, rect)
    refs = _extended_refs(top, left, w, h)
    out = np.empty((NUM_MODES, h, w), dtype=np.int32)

    t, l = top[1:w + 1], left[:h]
    top_right, bottom_left = top[w + 1], left[h]
    up, down, back, fwd = _planar_weights(w, h)
    pred_v = up * t[None, :] + down * bottom_left
    pred_h = back * l[:, None] + fwd * top_right
    out[PLANAR] = (pred_v * w + pred_h * h + w * h) // (2 * w * h)
    out[DC] = (int(t.sum()) + int(l.sum()) + (w + h) // 2) // (w + h)

    idx0, idx1, frac = _angular_tables(w, h)
    out[2:] = ((32 - frac) * refs[idx0] + frac * refs[idx1] + 16) >> 5
    # interpolations of in-range references stay in range; clamp is a guard
    np.minimum(out, plane.max_value, out=out)
    np.maximum(out, 0, out=out)
    return out


def mode_costs(plane: Plane, rect: Rect, preds: np.ndarray | None = None) -> np.ndarray:
    """SAD + weighted mode-bit cost per mode."""
    if preds is None:
        preds = predict_all_modes(plane, rect)
    orig = plane.view(rect).astype(np.int32)
    sad = np.abs(preds - orig[None]).sum(axis=(1, 2))
    return sad + SAD_MODE_WEIGHT * MODE_BITS


def predict_np(plane: Plane, rect: Rect) -> PredictedBlock:
    """Best-SAD intra prediction for the unsplit CU (lowest mode index wins ties)."""
    if rect.w < 4 or rect.h < 4:
        raise ValueError(f"prediction needs at least 4x4, got {rect.w}x{rect.h}")
    preds = predict_all_modes(plane, rect)
    costs = mode_costs(plane, rect, preds)
    best = int(np.argmin(costs))
    return PredictedBlock(rect, preds[best], best, MODE_BITS,
                          int(costs[best]) - SAD_MODE_WEIGHT * MODE_BITS)
