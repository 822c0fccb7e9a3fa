"""Recursive QTMT partition search over CTUs, exhaustive or pruned.

Each CU tests NP plus a set of split modes, recursing into children for
every split, and keeps the mode with the lowest RD cost. With a pruning
policy the split set is cut down first; everything else is identical, so a
pruned search can never beat the exhaustive one on cost.
"""

from __future__ import annotations

import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .media_io import Plane, Rect, pad_plane
from .intra import PredictedBlock, predict_np
from .policy import gate, select_modes, select_random
from .rd import NpResult, QpConfig, RdCost, encode_np, split_cost
from .ssimv import SplitMode, SsimvResult, compute_ssimv

POLICIES = ("full", "fds-ssimv", "random-half")


@dataclass(frozen=True)
class CuContext:
    rect: Rect
    qt_depth: int = 0
    mt_depth: int = 0
    under_mt: bool = False

    @property
    def key(self) -> tuple:
        """Everything that determines the CU's sub-search (QT depth does not)."""
        return self.rect, self.mt_depth, self.under_mt

    def child(self, mode: SplitMode, rect: Rect) -> "CuContext":
        if mode == SplitMode.QT:
            return CuContext(rect, self.qt_depth + 1, self.mt_depth, self.under_mt)
        return CuContext(rect, self.qt_depth, self.mt_depth + 1, True)


@dataclass
class SearchConfig:
    ctu_size: int = 64
    min_cu: int = 4
    max_mt_depth: int = 3
    max_tt_size: int = 32
    qp: QpConfig = field(default_factory=lambda: QpConfig(32))
    policy: str = "fds-ssimv"
    ssim_variant: str = "standard"
    seed: int = 0

    def __post_init__(self):
        if self.ctu_size < 4 or self.ctu_size & (self.ctu_size - 1):
            raise ValueError(f"ctu_size must be a power of two, got {self.ctu_size}")
        if self.min_cu < 4:
            raise ValueError(f"min_cu must be at least 4, got {self.min_cu}")
        if self.max_mt_depth < 0:
            raise ValueError("max_mt_depth must be non-negative")
        if self.policy not in POLICIES:
            raise ValueError(f"policy must be one of {POLICIES}, got {self.policy!r}")
        if isinstance(self.qp, int):
            self.qp = QpConfig(self.qp)


@dataclass(eq=False)
class PartitionNode:
    cu: CuContext
    chosen: SplitMode
    cost: RdCost
    children: list["PartitionNode"] = field(default_factory=list)

    @property
    def rect(self) -> Rect:
        return self.cu.rect

    def leaves(self) -> Iterator["PartitionNode"]:
        if not self.children:
            yield self
        for c in self.children:
            yield from c.leaves()

    def nodes(self) -> Iterator["PartitionNode"]:
        yield self
        for c in self.children:
            yield from c.nodes()

    def signature(self) -> tuple:
        """Hashable shape of the tree, for comparing partitions."""
        r = self.rect
        return (r.x, r.y, r.w, r.h, int(self.chosen), tuple(c.signature() for c in self.children))


@dataclass(eq=False)
class DecisionRecord:
    cu: CuContext
    permitted: frozenset
    ssimv: SsimvResult | None
    tested: tuple[SplitMode, ...]
    skipped: tuple[SplitMode, ...]
    full_best: SplitMode | None = None
    ssimv_time: float = 0.0

    @property
    def hit(self) -> bool:
        if self.full_best is None:
            raise ValueError("record was not paired with a full search")
        return self.full_best in self.tested


@dataclass(eq=False)
class SearchResult:
    tree: PartitionNode
    records: list[DecisionRecord]
    choices: dict  # CuContext.key -> chosen SplitMode, every visited CU
    elapsed: float
    ssimv_time: float
    visits: int
    predictions: int

    def __iter__(self):
        # allows ``tree, records = search(...)``
        return iter((self.tree, self.records))


def permitted_modes(cu: CuContext, cfg: SearchConfig) -> frozenset:
    """Split modes allowed for ``cu``; NP is always available and not listed."""
    w, h = cu.rect.w, cu.rect.h
    m = cfg.min_cu
    out = set()
    if w == h and w >= 4 * m and not cu.under_mt:
        out.add(SplitMode.QT)
    if cu.mt_depth < cfg.max_mt_depth:
        if h >= 2 * m:
            out.add(SplitMode.BTH)
        if w >= 2 * m:
            out.add(SplitMode.BTV)
        if max(w, h) <= cfg.max_tt_size:
            if h >= 4 * m:
                out.add(SplitMode.TTH)
            if w >= 4 * m:
                out.add(SplitMode.TTV)
    return frozenset(out)


def split_rects(mode: SplitMode, rect: Rect) -> tuple[Rect, ...]:
    """Coding sub-CUs of a split; TT uses the 1/4, 1/2, 1/4 pattern."""
    x, y, w, h = rect.x, rect.y, rect.w, rect.h
    if mode == SplitMode.QT:
        hw, hh = w // 2, h // 2
        return (Rect(x, y, hw, hh), Rect(x + hw, y, hw, hh),
                Rect(x, y + hh, hw, hh), Rect(x + hw, y + hh, hw, hh))
    if mode == SplitMode.BTH:
        return Rect(x, y, w, h // 2), Rect(x, y + h // 2, w, h // 2)
    if mode == SplitMode.BTV:
        return Rect(x, y, w // 2, h), Rect(x + w // 2, y, w // 2, h)
    if mode == SplitMode.TTH:
        q = h // 4
        return Rect(x, y, w, q), Rect(x, y + q, w, 2 * q), Rect(x, y + 3 * q, w, q)
    if mode == SplitMode.TTV:
        q = w // 4
        return Rect(x, y, q, h), Rect(x + q, y, 2 * q, h), Rect(x + 3 * q, y, q, h)
    raise ValueError(f"{mode!r} has no children")


class _Searcher:
    def __init__(self, plane: Plane, cfg: SearchConfig):
        self.plane = plane
        self.cfg = cfg
        self.pred_cache: dict[Rect, PredictedBlock] = {}
        self.records: list[DecisionRecord] = []
        self.choices: dict = {}
        self.ssimv_time = 0.0
        self.visits = 0
        # seeded per CTU so results do not depend on CTU scheduling order
        self.rng = random.Random(cfg.seed)

    def np_result(self, rect: Rect) -> NpResult:
        # the intra mode decision is reused for a revisited rectangle,
        # residual coding and RD evaluation are redone at every visit
        pred = self.pred_cache.get(rect)
        if pred is None:
            pred = self.pred_cache[rect] = predict_np(self.plane, rect)
        return encode_np(self.plane, rect, self.cfg.qp, pred)

    def tested_modes(self, cu: CuContext, permitted: frozenset, np_res: NpResult):
        cfg = self.cfg
        everything = (SplitMode.NP,) + tuple(sorted(permitted))
        if not permitted or not gate(cu):
            return everything
        if cfg.policy == "full":
            # recorded so an exhaustive run can stand in as the test arm
            self.records.append(DecisionRecord(cu, permitted, None, everything, ()))
            return everything
        t0 = time.perf_counter()
        ssimv = None
        if cfg.policy == "fds-ssimv":
            ssimv = compute_ssimv(self.plane, np_res.pred, permitted, variant=cfg.ssim_variant)
            decision = select_modes(permitted, ssimv)
        else:
            decision = select_random(permitted, self.rng)
        dt = time.perf_counter() - t0
        self.ssimv_time += dt
        self.records.append(DecisionRecord(cu, permitted, ssimv, decision.tested,
                                           decision.skipped, ssimv_time=dt))
        return decision.tested

    def run(self, cu: CuContext) -> PartitionNode:
        self.visits += 1
        np_res = self.np_result(cu.rect)
        best = PartitionNode(cu, SplitMode.NP, np_res.cost)
        permitted = permitted_modes(cu, self.cfg)
        for mode in self.tested_modes(cu, permitted, np_res)[1:]:
            children = [self.run(cu.child(mode, r)) for r in split_rects(mode, cu.rect)]
            cost = split_cost([c.cost for c in children], mode)
            if cost.j < best.cost.j:
                best = PartitionNode(cu, mode, cost, children)
        self.choices[cu.key] = best.chosen
        return best


def search(plane: Plane, ctu: Rect, cfg: SearchConfig) -> SearchResult:
    """Best partition of one CTU under ``cfg.policy``."""
    if ctu.x1 > plane.width or ctu.y1 > plane.height:
        raise ValueError(f"CTU {ctu} exceeds {plane.width}x{plane.height} plane (pad first)")
    s = _Searcher(plane, cfg)
    t0 = time.perf_counter()
    tree = s.run(CuContext(ctu))
    elapsed = time.perf_counter() - t0
    return SearchResult(tree, s.records, s.choices, elapsed, s.ssimv_time,
                        s.visits, len(s.pred_cache))


def ctu_grid(plane: Plane, ctu_size: int) -> list[Rect]:
    """CTU rectangles covering ``plane`` in raster order (plane must be padded)."""
    return [Rect(x, y, ctu_size, ctu_size)
            for y in range(0, plane.height - ctu_size + 1, ctu_size)
            for x in range(0, plane.width - ctu_size + 1, ctu_size)]


def _search_job(args):
    plane, ctu, cfg = args
    return search(plane, ctu, cfg)


def search_frame(plane: Plane, cfg: SearchConfig, threads: int = 1) -> list[SearchResult]:
    """Search every CTU of a frame, padding by edge replication first."""
    padded = pad_plane(plane, cfg.ctu_size)
    jobs = [(padded, ctu, cfg) for ctu in ctu_grid(padded, cfg.ctu_size)]
    if threads > 1:
        with ProcessPoolExecutor(threads) as pool:
            return list(pool.map(_search_job, jobs))
    return [_search_job(j) for j in jobs]


def reconstruct(plane: Plane, trees: list[PartitionNode], qp: QpConfig) -> np.ndarray:
    """Reconstructed samples of the (padded) plane coded with the given leaves."""
    padded = pad_plane(plane, trees[0].rect.w) if trees else plane
    out = np.zeros((padded.height, padded.width), dtype=np.int64)
    for tree in trees:
        for leaf in tree.leaves():
            r = leaf.rect
            out[r.y:r.y1, r.x:r.x1] = encode_np(padded, r, qp).recon
    return out


@dataclass(eq=False)
class PairedResult:
    reference: list[SearchResult]
    test: list[SearchResult]
    records: list[DecisionRecord]
    containment_violations: list[str]

    @property
    def t_org(self) -> float:
        return sum(r.elapsed for r in self.reference)

    @property
    def t_pro(self) -> float:
        return sum(r.elapsed for r in self.test)

    @property
    def t_ssim(self) -> float:
        return sum(r.ssimv_time for r in self.test)


def check_containment(full: SearchResult, pruned: SearchResult, cfg: SearchConfig) -> list[str]:
    """Violations of cost and tested-set containment between paired CTU searches."""
    problems = []
    if pruned.tree.cost.j < full.tree.cost.j:
        problems.append(f"CTU {full.tree.rect}: pruned j {pruned.tree.cost.j} < full j {full.tree.cost.j}")
    for rec in pruned.records:
        full_tested = {SplitMode.NP} | permitted_modes(rec.cu, cfg)
        if not set(rec.tested) <= full_tested:
            problems.append(f"{rec.cu.rect}: tested {rec.tested} outside full set")
        if rec.cu.key not in full.choices:
            problems.append(f"{rec.cu.rect}: visited by pruned search only")
    return problems


def search_paired(plane: Plane, cfg: SearchConfig, reference_policy: str = "full",
                  threads: int = 1, reference: list[SearchResult] | None = None) -> PairedResult:
    """Run the reference and test searches and stamp test records with the
    reference's chosen mode at the same CU.

    A precomputed ``reference`` (per-CTU results of ``search_frame``) can be
    passed to pair several test policies against one exhaustive run.
    Records for CUs lying entirely in right/bottom padding are dropped.
    """
    if reference is None:
        ref_cfg = SearchConfig(**{**cfg.__dict__, "policy": reference_policy})
        reference = search_frame(plane, ref_cfg, threads)
    test = search_frame(plane, cfg, threads)
    records, violations = [], []
    for full, pruned in zip(reference, test):
        violations += check_containment(full, pruned, cfg)
        for rec in pruned.records:
            if rec.cu.rect.x >= plane.width or rec.cu.rect.y >= plane.height:
                continue
            rec.full_best = full.choices.get(rec.cu.key)
            records.append(rec)
    return PairedResult(reference, test, records, violations)
