"""Toy rate-distortion model: J = D + lambda * R per CU and per split.

Residuals are transformed with an orthonormal 2-D DCT-II (one transform per
CU, tiled at 32x32 above that), uniformly quantised, and charged with a
log-magnitude bit estimate in place of entropy coding.
"""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .intra import PredictedBlock, predict_np
from .media_io import Plane, Rect

MAX_TRANSFORM = 32
SPLIT_FLAG_BITS = 2


@dataclass(frozen=True)
class QpConfig:
    qp: int
    lam: float | None = None

    def __post_init__(self):
        if not 0 <= self.qp <= 51:
            raise ValueError(f"qp must lie in [0, 51], got {self.qp}")
        if self.lam is None:
            object.__setattr__(self, "lam", 0.57 * 2 ** ((self.qp - 12) / 3))
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")

    @property
    def qstep(self) -> float:
        return 2 ** ((self.qp - 4) / 6)


@dataclass(frozen=True)
class RdCost:
    distortion: float
    rate: float
    lam: float
    j: float = field(init=False)

    def __post_init__(self):
        if self.distortion < 0 or self.rate < 0:
            raise ValueError(f"negative distortion/rate: {self.distortion}, {self.rate}")
        object.__setattr__(self, "j", self.distortion + self.lam * self.rate)


@dataclass(frozen=True, eq=False)
class NpResult:
    pred: PredictedBlock
    recon: np.ndarray
    cost: RdCost


def _is_pow2(n: int) -> bool:
    return n >= 4 and n & (n - 1) == 0


def _tiles(block: np.ndarray, th: int, tw: int) -> np.ndarray:
    h, w = block.shape
    return block.reshape(h // th, th, w // tw, tw).swapaxes(1, 2)


def _untile(tiles: np.ndarray) -> np.ndarray:
    ny, nx, th, tw = tiles.shape
    return tiles.swapaxes(1, 2).reshape(ny * th, nx * tw)


@lru_cache(maxsize=None)
def dct_matrix(n: int) -> np.ndarray:
    """Orthonormal DCT-II basis, rows are frequencies."""
    k = np.arange(n)[:, None]
    i = np.arange(n)[None, :]
    c = np.cos(np.pi * (2 * i + 1) * k / (2 * n)) * np.sqrt(2.0 / n)
    c[0] /= np.sqrt(2.0)
    c.setflags(write=False)
    return c


def _tile_bases(shape: tuple[int, int]):
    h, w = shape
    th, tw = min(h, MAX_TRANSFORM), min(w, MAX_TRANSFORM)
    return th, tw, dct_matrix(th), dct_matrix(tw)


def forward_transform(residual: np.ndarray) -> np.ndarray:
    """Orthonormal 2-D DCT-II per transform tile; output keeps the block layout."""
    th, tw, ch, cw = _tile_bases(residual.shape)
    return _untile(ch @ _tiles(np.asarray(residual, dtype=np.float64), th, tw) @ cw.T)


def inverse_transform(coefs: np.ndarray) -> np.ndarray:
    th, tw, ch, cw = _tile_bases(coefs.shape)
    return _untile(ch.T @ _tiles(coefs, th, tw) @ cw)


def quantize(coefs: np.ndarray, qstep: float) -> np.ndarray:
    """Uniform quantiser, round half away from zero."""
    x = coefs / qstep
    return (np.sign(x) * np.floor(np.abs(x) + 0.5)).astype(np.int64)


def coefficient_bits(levels: np.ndarray) -> int:
    """Sum of 2*ceil(log2(1+|q|)) + 1 over all levels."""
    # ceil(log2(1+n)) is the bit length of n for integers n >= 0
    _, bitlen = np.frexp(np.abs(levels).astype(np.float64))
    return int((2 * bitlen + 1).sum())


def encode_np(plane: Plane, rect: Rect, qp: QpConfig,
              pred: PredictedBlock | None = None) -> NpResult:
    """Predict, transform, quantise and reconstruct one unsplit CU."""
    if not (_is_pow2(rect.w) and _is_pow2(rect.h)):
        raise ValueError(f"CU dimensions must be powers of two >= 4, got {rect.w}x{rect.h}")
    if pred is None:
        pred = predict_np(plane, rect)
    orig = plane.view(rect).astype(np.int64)
    levels = quantize(forward_transform(orig - pred.samples), qp.qstep)
    recon = pred.samples + np.floor(inverse_transform(levels * qp.qstep) + 0.5).astype(np.int64)
    np.minimum(recon, plane.max_value, out=recon)
    np.maximum(recon, 0, out=recon)
    err = orig - recon
    distortion = int(np.vdot(err, err))
    rate = coefficient_bits(levels) + pred.mode_bits
    return NpResult(pred, recon, RdCost(distortion, rate, qp.lam))


def np_cost(plane: Plane, rect: Rect, qp: QpConfig, pred: PredictedBlock | None = None) -> RdCost:
    return encode_np(plane, rect, qp, pred).cost


def split_cost(children: Sequence[RdCost], mode=None) -> RdCost:
    """Combine child costs; the split itself is charged a fixed signalling rate.

    ``mode`` is accepted for symmetry with the search and does not change the
    charge.
    """
    if not children:
        raise ValueError("split needs at least one child")
    lam = children[0].lam
    if any(c.lam != lam for c in children):
        raise ValueError("children were costed with different lambdas")
    return RdCost(sum(c.distortion for c in children),
                  sum(c.rate for c in children) + SPLIT_FLAG_BITS, lam)


def psnr(sse: float, num_samples: int, bit_depth: int) -> float:
    peak = (1 << bit_depth) - 1
    if sse == 0:
        return math.inf
    return 10 * math.log10(peak * peak * num_samples / sse)
