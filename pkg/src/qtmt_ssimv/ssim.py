"""Gaussian-windowed SSIM between an original block and its prediction."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .intra import PredictedBlock
from .media_io import Plane, Rect

K1, K2 = 0.01, 0.03
WINDOW_SIZES = (4, 11)
DEFAULT_SIGMA = {11: 1.5, 4: 0.75}
VARIANTS = ("standard", "paper-literal")


@dataclass(frozen=True)
class SsimParams:
    bit_depth: int = 10
    window: int = 11
    sigma: float | None = None
    k1: float = K1
    k2: float = K2
    variant: str = "standard"

    def __post_init__(self):
        if self.window not in WINDOW_SIZES:
            raise ValueError(f"window must be one of {WINDOW_SIZES}, got {self.window}")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown SSIM variant {self.variant!r}")
        if self.sigma is None:
            object.__setattr__(self, "sigma", DEFAULT_SIGMA[self.window])
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    @property
    def dynamic_range(self) -> int:
        return (1 << self.bit_depth) - 1

    @property
    def c1(self) -> float:
        return (self.k1 * self.dynamic_range) ** 2

    @property
    def c2(self) -> float:
        return (self.k2 * self.dynamic_range) ** 2


@lru_cache(maxsize=None)
def _gaussian_1d(size: int, sigma: float) -> np.ndarray:
    offsets = np.arange(size) - (size - 1) / 2
    g = np.exp(-offsets ** 2 / (2 * sigma ** 2))
    g /= g.sum()
    g.setflags(write=False)
    return g


def gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    """Normalised separable 2-D Gaussian sampled at cell centres.

    For even sizes the centre falls between cells, so a 4-tap kernel is
    sampled at offsets +-0.5 and +-1.5.
    """
    if size not in WINDOW_SIZES:
        raise ValueError(f"kernel size must be one of {WINDOW_SIZES}, got {size}")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    g = _gaussian_1d(size, float(sigma))
    return np.outer(g, g)


@lru_cache(maxsize=None)
def _band_matrix(n: int, size: int, sigma: float) -> np.ndarray:
    """``(n - size + 1, n)`` matrix applying the 1-D kernel at each valid offset."""
    g = _gaussian_1d(size, sigma)
    m = np.zeros((n - size + 1, n))
    for i in range(n - size + 1):
        m[i, i:i + size] = g
    m.setflags(write=False)
    return m


def _filter_valid(x: np.ndarray, size: int, sigma: float) -> np.ndarray:
    """Valid-mode separable Gaussian filtering over the last two axes."""
    fh = _band_matrix(x.shape[-2], size, sigma)
    fw = _band_matrix(x.shape[-1], size, sigma)
    return fh @ x @ fw.T


def ssim_map(o: np.ndarray, p: np.ndarray, params: SsimParams) -> np.ndarray:
    """Local SSIM at every valid window position (stride 1, no padding)."""
    o = np.asarray(o, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    if o.shape != p.shape:
        raise ValueError(f"block shapes differ: {o.shape} vs {p.shape}")
    if min(o.shape) < params.window:
        raise ValueError(f"{o.shape[1]}x{o.shape[0]} block smaller than {params.window}x{params.window} window")
    c1, c2 = params.c1, params.c2
    # second moments are taken about a common offset to limit cancellation
    shift = 0.5 * (o.mean() + p.mean())
    oc, pc = o - shift, p - shift
    mo, mp, oo, pp, op = _filter_valid(np.stack((oc, pc, oc * oc, pc * pc, oc * pc)),
                                       params.window, float(params.sigma))
    var_o = oo - mo * mo
    var_p = pp - mp * mp
    mu_o, mu_p = mo + shift, mp + shift
    lum_num = 2 * mu_o * mu_p + c1
    lum_den = mu_o * mu_o + mu_p * mu_p + c1
    if params.variant == "standard":
        cov = op - mo * mp
        return (lum_num * (2 * cov + c2)) / (lum_den * (var_o + var_p + c2))
    # printed form: product of deviations on top, c1 in the variance term below
    sd = np.sqrt(np.maximum(var_o, 0.0)) * np.sqrt(np.maximum(var_p, 0.0))
    return (lum_num * (2 * sd + c2)) / (lum_den * (var_o + var_p + c1))


def ssim_block(o: np.ndarray, p: np.ndarray, params: SsimParams) -> float:
    """Mean local SSIM of ``p`` against ``o``."""
    return float(ssim_map(o, p, params).mean())


def window_for(rect: Rect) -> int:
    return 11 if min(rect.w, rect.h) > 11 else 4


def ssim_sub_cu(plane: Plane, pred: PredictedBlock, sub: Rect, *,
                variant: str = "standard", sigmas: dict[int, float] | None = None) -> float:
    """SSIM of one sub-region of a predicted CU against the original samples.

    Sub-regions whose smaller side exceeds 11 use the 11x11 window, all
    others the 4x4 window.
    """
    if not pred.rect.contains(sub):
        raise ValueError(f"{sub} not inside predicted {pred.rect}")
    if sub.w < 4 or sub.h < 4:
        raise ValueError(f"sub-CU {sub.w}x{sub.h} smaller than 4x4")
    win = window_for(sub)
    sigma = (sigmas or DEFAULT_SIGMA).get(win, DEFAULT_SIGMA[win])
    params = SsimParams(plane.bit_depth, win, sigma, variant=variant)
    dx, dy = sub.x - pred.rect.x, sub.y - pred.rect.y
    p = pred.samples[dy:dy + sub.h, dx:dx + sub.w]
    return ssim_block(plane.view(sub), p, params)
