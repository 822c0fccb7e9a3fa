"""Evaluation metrics: time saving, method overhead, split prediction
accuracy and Bjontegaard delta rate."""

from __future__ import annotations

import math
import statistics
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .ssimv import MT_MODES, SplitMode


def time_saving(t_org: float, t_pro: float) -> float:
    """|T_org - T_pro| / T_org in percent."""
    if t_org <= 0:
        raise ValueError("reference time must be positive")
    return abs(t_org - t_pro) / t_org * 100


def overhead(t_ssim: float, t_pro: float) -> float:
    """Share of the pruned run spent computing SSIMV, in percent."""
    if t_pro <= 0:
        raise ValueError("pruned run time must be positive")
    if t_ssim < 0 or t_ssim > t_pro:
        raise ValueError(f"SSIMV time {t_ssim} outside [0, {t_pro}]")
    return t_ssim / t_pro * 100


@dataclass
class TimingReport:
    t_org: float
    t_pro: float
    t_ssim: float
    runs: list[tuple[float, float, float]] = field(default_factory=list)

    @property
    def ts_percent(self) -> float:
        return time_saving(self.t_org, self.t_pro)

    @property
    def oh_percent(self) -> float:
        return overhead(self.t_ssim, self.t_pro)

    @classmethod
    def from_runs(cls, runs: Sequence[tuple[float, float, float]]) -> "TimingReport":
        """Median over repeated ``(t_org, t_pro, t_ssim)`` measurements.

        The median run is picked by ``t_pro`` so the three numbers stay
        consistent with each other (t_ssim <= t_pro).
        """
        if not runs:
            raise ValueError("no timing runs")
        t_org = statistics.median(r[0] for r in runs)
        by_pro = sorted(runs, key=lambda r: r[1])
        _, t_pro, t_ssim = by_pro[(len(by_pro) - 1) // 2]
        return cls(t_org, t_pro, t_ssim, [tuple(r) for r in runs])

    def as_dict(self) -> dict:
        return {"t_org": self.t_org, "t_pro": self.t_pro, "t_ssim": self.t_ssim,
                "ts_percent": self.ts_percent, "oh_percent": self.oh_percent,
                "runs": [list(r) for r in self.runs]}


@dataclass
class Tally:
    hits: int = 0
    total: int = 0

    @property
    def misses(self) -> int:
        return self.total - self.hits

    @property
    def accuracy(self) -> float | None:
        return self.hits / self.total if self.total else None

    def add(self, hit: bool) -> None:
        self.hits += bool(hit)
        self.total += 1

    def as_dict(self) -> dict:
        return {"hits": self.hits, "total": self.total, "accuracy": self.accuracy}


def size_label(w: int, h: int) -> str:
    return f"{w}x{h}"


@dataclass
class AccuracyReport:
    """Hit counts of pruned decisions against the exhaustive search.

    A record is a hit when the exhaustive search's chosen mode at that CU was
    kept in the pruned tested set. Multi-type winners (BTH/BTV/TTH/TTV) are
    bucketed by CU size and mode; NP/QT winners are always hits and are
    tallied separately.
    """

    cells: dict[tuple[str, str], Tally] = field(default_factory=lambda: defaultdict(Tally))
    by_size: dict[str, Tally] = field(default_factory=lambda: defaultdict(Tally))
    by_mode: dict[str, Tally] = field(default_factory=lambda: defaultdict(Tally))
    overall: Tally = field(default_factory=Tally)
    other: dict[str, Tally] = field(default_factory=lambda: defaultdict(Tally))
    all_records: Tally = field(default_factory=Tally)

    def as_dict(self) -> dict:
        return {
            "overall": self.overall.as_dict(),
            "all_records": self.all_records.as_dict(),
            "by_size": {k: v.as_dict() for k, v in sorted(self.by_size.items())},
            "by_mode": {k: v.as_dict() for k, v in sorted(self.by_mode.items())},
            "cells": {f"{s}/{m}": v.as_dict() for (s, m), v in sorted(self.cells.items())},
            "other": {k: v.as_dict() for k, v in sorted(self.other.items())},
        }


def prediction_accuracy(records: Iterable) -> AccuracyReport:
    rep = AccuracyReport()
    for rec in records:
        if rec.full_best is None:
            raise ValueError(f"record at {rec.cu.rect} has no full-search mode")
        best = SplitMode(rec.full_best)
        hit = best in rec.tested
        rep.all_records.add(hit)
        if best in MT_MODES:
            size = size_label(rec.cu.rect.w, rec.cu.rect.h)
            rep.cells[size, best.name].add(hit)
            rep.by_size[size].add(hit)
            rep.by_mode[best.name].add(hit)
            rep.overall.add(hit)
        else:
            rep.other[best.name].add(hit)
    return rep


@dataclass(frozen=True)
class RdPoint:
    rate: float  # bits
    quality: float  # PSNR, dB

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate}")
        if self.quality is None or not math.isfinite(self.quality):
            raise ValueError(f"quality must be finite, got {self.quality}")


def _curve(points: Sequence) -> tuple[np.ndarray, np.ndarray]:
    pts = [p if isinstance(p, RdPoint) else RdPoint(*p) for p in points]
    if len(pts) < 4:
        raise ValueError(f"BD-rate needs at least 4 points per curve, got {len(pts)}")
    pts.sort(key=lambda p: p.rate)
    rate = np.array([p.rate for p in pts], dtype=np.float64)
    quality = np.array([p.quality for p in pts], dtype=np.float64)
    if np.any(np.diff(rate) <= 0):
        raise ValueError("rates within a curve must be distinct")
    if np.any(np.diff(quality) <= 0):
        raise ValueError("quality must increase strictly with rate")
    return np.log(rate), quality


def bd_rate(anchor: Sequence, test: Sequence) -> float:
    """Bjontegaard delta rate of ``test`` against ``anchor``, in percent.

    Log-rate is fitted as a cubic in quality for each curve and the two
    fits are integrated over the shared quality interval. Negative means the
    test curve needs fewer bits for the same quality.
    """
    log_ra, qa = _curve(anchor)
    log_rt, qt = _curve(test)
    lo, hi = max(qa.min(), qt.min()), min(qa.max(), qt.max())
    if hi <= lo:
        raise ValueError(f"quality ranges do not overlap ({lo:.3f} >= {hi:.3f})")
    # centring the quality axis keeps the Vandermonde system well conditioned
    centre = (lo + hi) / 2
    fit_a = np.polyfit(qa - centre, log_ra, 3)
    fit_t = np.polyfit(qt - centre, log_rt, 3)
    if not (np.all(np.isfinite(fit_a)) and np.all(np.isfinite(fit_t))):
        raise ValueError("degenerate cubic fit")
    int_a, int_t = np.polyint(fit_a), np.polyint(fit_t)
    lo, hi = lo - centre, hi - centre
    area_a = np.polyval(int_a, hi) - np.polyval(int_a, lo)
    area_t = np.polyval(int_t, hi) - np.polyval(int_t, lo)
    return float((math.exp((area_t - area_a) / (hi - lo)) - 1) * 100)
