"""Drivers that run the searches over whole inputs and collect results."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .intra import predict_np
from .media_io import Plane, Rect
from .metrics import AccuracyReport, RdPoint, TimingReport, bd_rate, prediction_accuracy
from .rd import QpConfig, psnr
from .search import (DecisionRecord, PairedResult, SearchConfig, SearchResult,
                     reconstruct, search_frame, search_paired)
from .ssim import SsimParams, ssim_map

log = logging.getLogger(__name__)

DEFAULT_QPS = (22, 27, 32, 37)

# --- per-split-mode sub-CU SSIM statistics on 32x32 CUs -----------------------

ANALYSIS_CU = 32
ANALYSIS_BLOCK = 4

# region -> (block rows, block cols) on the 8x8 grid of 4x4 blocks;
# TT regions follow the coding 1/4, 1/2, 1/4 split here
ANALYSIS_REGIONS = {
    "QT1": (slice(0, 4), slice(0, 4)), "QT2": (slice(0, 4), slice(4, 8)),
    "QT3": (slice(4, 8), slice(0, 4)), "QT4": (slice(4, 8), slice(4, 8)),
    "BTH1": (slice(0, 4), slice(0, 8)), "BTH2": (slice(4, 8), slice(0, 8)),
    "BTV1": (slice(0, 8), slice(0, 4)), "BTV2": (slice(0, 8), slice(4, 8)),
    "TTH1": (slice(0, 2), slice(0, 8)), "TTH2": (slice(2, 6), slice(0, 8)),
    "TTH3": (slice(6, 8), slice(0, 8)),
    "TTV1": (slice(0, 8), slice(0, 2)), "TTV2": (slice(0, 8), slice(2, 6)),
    "TTV3": (slice(0, 8), slice(6, 8)),
}

Predictor = Callable[[Plane, Rect], np.ndarray]


def _np_samples(plane: Plane, rect: Rect) -> np.ndarray:
    return predict_np(plane, rect).samples


def block_ssim_grid(plane: Plane, rect: Rect, pred: np.ndarray, variant: str = "standard") -> np.ndarray:
    """SSIM of each non-overlapping 4x4 block of ``rect`` (4x4 window, one position each)."""
    params = SsimParams(plane.bit_depth, ANALYSIS_BLOCK, variant=variant)
    local = ssim_map(plane.view(rect), pred, params)
    return local[::ANALYSIS_BLOCK, ::ANALYSIS_BLOCK]


def analyze_regions(planes: Iterable[Plane], predictor: Predictor | None = None,
                    variant: str = "standard") -> dict[str, np.ndarray]:
    """Collect 4x4-block SSIM values per split-mode region over all 32x32 CUs.

    CUs lie on an aligned grid fully inside each plane. ``predictor`` maps
    ``(plane, rect)`` to predicted samples and defaults to the best-SAD intra
    prediction.
    """
    predictor = predictor or _np_samples
    values: dict[str, list] = {name: [] for name in ANALYSIS_REGIONS}
    for plane in planes:
        for y in range(0, plane.height - ANALYSIS_CU + 1, ANALYSIS_CU):
            for x in range(0, plane.width - ANALYSIS_CU + 1, ANALYSIS_CU):
                rect = Rect(x, y, ANALYSIS_CU, ANALYSIS_CU)
                grid = block_ssim_grid(plane, rect, np.asarray(predictor(plane, rect)), variant)
                for name, (rows, cols) in ANALYSIS_REGIONS.items():
                    values[name].append(grid[rows, cols].ravel())
    return {k: np.concatenate(v) if v else np.empty(0) for k, v in values.items()}


def region_statistics(values: dict[str, np.ndarray]) -> list[dict]:
    rows = []
    for name, v in values.items():
        rows.append({"region": name, "count": int(v.size),
                     "mean": float(v.mean()) if v.size else float("nan"),
                     "std": float(v.std()) if v.size else float("nan")})
    return rows


# --- paired full-vs-pruned evaluation --------------------------------------------

@dataclass
class CtuRow:
    frame: int
    qp: int
    x: int
    y: int
    j_full: float
    j_pruned: float
    rate_full: float
    rate_pruned: float
    t_full: float
    t_pruned: float
    t_ssim: float
    visits_full: int
    visits_pruned: int


@dataclass
class Evaluation:
    """Everything measured for one input under one configuration."""

    timing: TimingReport
    accuracy: AccuracyReport
    anchor: list[dict]  # per qp: qp, rate, psnr (None when lossless), sse
    test: list[dict]
    bd_rate: float | None
    containment_violations: list[str]
    ctus: list[CtuRow] = field(default_factory=list)
    records: list[DecisionRecord] = field(default_factory=list)
    trees: dict = field(default_factory=dict)  # (frame, qp, arm) -> list of CTU trees


def _frame_sse(plane: Plane, results: Sequence[SearchResult], qp: QpConfig) -> int:
    recon = reconstruct(plane, [r.tree for r in results], qp)[:plane.height, :plane.width]
    err = plane.samples.astype(np.int64) - recon
    return int(np.vdot(err, err))


def evaluate(planes: Sequence[Plane], cfg: SearchConfig, qps: Sequence[int] = DEFAULT_QPS,
             repeats: int = 1, threads: int = 1, reference_policy: str = "full",
             keep_trees_for_frame: int | None = 0) -> Evaluation:
    """Paired reference/test searches over every frame and QP.

    Timing is repeated ``repeats`` times and the median run is reported; all
    other outputs come from the first repetition (they are deterministic).
    """
    if not qps:
        raise ValueError("need at least one QP")
    runs = []
    records: list[DecisionRecord] = []
    ctus: list[CtuRow] = []
    violations: list[str] = []
    trees: dict = {}
    sums = {arm: {qp: [0, 0] for qp in qps} for arm in ("anchor", "test")}  # rate, sse
    samples = sum(p.width * p.height for p in planes)

    for rep in range(repeats):
        t_org = t_pro = t_ssim = 0.0
        for fi, plane in enumerate(planes):
            for qp in qps:
                qcfg = replace(cfg, qp=QpConfig(qp))
                paired: PairedResult = search_paired(plane, qcfg, reference_policy, threads)
                t_org += paired.t_org
                t_pro += paired.t_pro
                t_ssim += paired.t_ssim
                if rep:
                    continue
                log.debug("frame %d qp %d: t_org %.2fs t_pro %.2fs", fi, qp, paired.t_org, paired.t_pro)
                records += paired.records
                violations += [f"frame {fi} qp {qp}: {v}" for v in paired.containment_violations]
                for arm, results in (("anchor", paired.reference), ("test", paired.test)):
                    sums[arm][qp][0] += sum(r.tree.cost.rate for r in results)
                    sums[arm][qp][1] += _frame_sse(plane, results, qcfg.qp)
                for full, pruned in zip(paired.reference, paired.test):
                    r = full.tree.rect
                    ctus.append(CtuRow(fi, qp, r.x, r.y, full.tree.cost.j, pruned.tree.cost.j,
                                       full.tree.cost.rate, pruned.tree.cost.rate,
                                       full.elapsed, pruned.elapsed, pruned.ssimv_time,
                                       full.visits, pruned.visits))
                if keep_trees_for_frame == fi:
                    trees[fi, qp, "anchor"] = [r.tree for r in paired.reference]
                    trees[fi, qp, "test"] = [r.tree for r in paired.test]
        runs.append((t_org, t_pro, t_ssim))

    bit_depth = planes[0].bit_depth if planes else 8
    # PSNR is None for lossless points (SSE 0)
    curves = {arm: [{"qp": qp, "rate": float(rate), "sse": int(sse),
                     "psnr": psnr(sse, samples, bit_depth) if sse else None}
                    for qp, (rate, sse) in sorted(sums[arm].items())]
              for arm in sums}
    bdbr = None
    if curves["anchor"] == curves["test"]:
        # identical curves: zero by definition, even where a fit would be degenerate
        bdbr = 0.0
    elif len(qps) >= 4:
        try:
            bdbr = bd_rate([RdPoint(c["rate"], c["psnr"]) for c in curves["anchor"]],
                           [RdPoint(c["rate"], c["psnr"]) for c in curves["test"]])
        except ValueError as exc:
            log.warning("BD-rate unavailable: %s", exc)

    return Evaluation(TimingReport.from_runs(runs), prediction_accuracy(records),
                      curves["anchor"], curves["test"], bdbr, violations, ctus, records, trees)


@dataclass
class BaselineComparison:
    timing: TimingReport
    accuracy: AccuracyReport
    baseline_accuracy: AccuracyReport
    containment_violations: list[str]
    baseline_timing: TimingReport


def compare_with_random(planes: Sequence[Plane], cfg: SearchConfig,
                        qps: Sequence[int] = DEFAULT_QPS) -> BaselineComparison:
    """SSIMV pruning and seeded random-half pruning paired against one shared
    exhaustive run per frame and QP."""
    t_org = t_pro = t_ssim = t_rand = t_rand_sel = 0.0
    fds_records, rand_records, violations = [], [], []
    for fi, plane in enumerate(planes):
        for qp in qps:
            fds_cfg = replace(cfg, qp=QpConfig(qp), policy="fds-ssimv")
            rand_cfg = replace(fds_cfg, policy="random-half")
            reference = search_frame(plane, replace(fds_cfg, policy="full"))
            fds = search_paired(plane, fds_cfg, reference=reference)
            rnd = search_paired(plane, rand_cfg, reference=reference)
            t_org += fds.t_org
            t_pro += fds.t_pro
            t_ssim += fds.t_ssim
            t_rand += rnd.t_pro
            t_rand_sel += rnd.t_ssim
            fds_records += fds.records
            rand_records += rnd.records
            violations += [f"frame {fi} qp {qp}: {v}" for v in
                           fds.containment_violations + rnd.containment_violations]
    return BaselineComparison(TimingReport(t_org, t_pro, t_ssim),
                              prediction_accuracy(fds_records),
                              prediction_accuracy(rand_records), violations,
                              TimingReport(t_org, t_rand, t_rand_sel))
