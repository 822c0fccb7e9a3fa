"""Split-mode pruning: rank permitted splits by SSIMV and skip the lower half.

QT is never skipped, and NP is always tested. When the quota exceeds the number of
multi-type candidates, skipping stops at the candidates available.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Mapping

from .media_io import Rect
from .ssimv import MT_MODES, SplitMode, SsimvResult

MIN_PRUNE_SIZE = 8


@dataclass(frozen=True)
class PolicyDecision:
    tested: tuple[SplitMode, ...]
    skipped: tuple[SplitMode, ...]
    ranking: tuple[SplitMode, ...] = ()


def _check_permitted(permitted: Iterable[SplitMode]) -> list[SplitMode]:
    modes = sorted(set(permitted))
    if SplitMode.NP in modes:
        raise ValueError("permitted set holds split modes only; NP is implicit")
    return modes


def skip_quota(permitted: Iterable[SplitMode]) -> int:
    modes = _check_permitted(permitted)
    return min(len(modes) // 2, sum(m in MT_MODES for m in modes))


def _decision(modes: list[SplitMode], skipped: list[SplitMode],
              ranking: tuple[SplitMode, ...] = ()) -> PolicyDecision:
    tested = (SplitMode.NP,) + tuple(m for m in modes if m not in skipped)
    return PolicyDecision(tested, tuple(sorted(skipped)), ranking)


def select_modes(permitted: Iterable[SplitMode],
                 ssimv: SsimvResult | Mapping[SplitMode, float]) -> PolicyDecision:
    """Skip the lowest-SSIMV multi-type splits, half the permitted count rounded down.

    Among equal SSIMV values the canonically later mode is skipped first.
    """
    modes = _check_permitted(permitted)
    values = ssimv.values if isinstance(ssimv, SsimvResult) else ssimv
    missing = [m.name for m in modes if m not in values]
    if missing:
        raise KeyError(f"no SSIMV for permitted modes: {', '.join(missing)}")

    ranking = tuple(sorted(modes, key=lambda m: (-values[m], m)))
    candidates = sorted((m for m in modes if m in MT_MODES), key=lambda m: (values[m], -m))
    k = skip_quota(modes)
    return _decision(modes, candidates[:k], ranking)


def select_random(permitted: Iterable[SplitMode], rng: random.Random) -> PolicyDecision:
    """Baseline: skip the same number of multi-type splits, chosen at random."""
    modes = _check_permitted(permitted)
    candidates = [m for m in modes if m in MT_MODES]
    return _decision(modes, rng.sample(candidates, skip_quota(modes)))


def gate(cu) -> bool:
    """Pruning applies to CUs of at least 8x8 (either a ``Rect`` or a CU context)."""
    rect = cu if isinstance(cu, Rect) else cu.rect
    return rect.w >= MIN_PRUNE_SIZE and rect.h >= MIN_PRUNE_SIZE
