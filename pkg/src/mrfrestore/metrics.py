"""MSE, PSNR and SSIM for 8-bit grayscale images (peak value L = 255).

SSIM defaults to a single evaluation over whole-image statistics. The
``windowed`` mode averages the same formula over non-overlapping 8x8 blocks
(a trailing partial block is included as-is). Variances and covariance use
the population convention (divide by N).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .image_core import as_grid

PEAK = 255.0
K1, K2 = 0.01, 0.03
C1 = (K1 * PEAK) ** 2
C2 = (K2 * PEAK) ** 2
SSIM_BLOCK = 8


def _pair(x, y):
    a = np.asarray(as_grid(x).pixels, dtype=np.float64)
    b = np.asarray(as_grid(y).pixels, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"image sizes differ: {a.shape} vs {b.shape}")
    return a, b


def mse(x, y) -> float:
    a, b = _pair(x, y)
    return float(np.mean((a - b) ** 2))


def psnr_from_mse(err: float) -> float:
    if err == 0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / err)


def psnr(x, y) -> float:
    return psnr_from_mse(mse(x, y))


def _ssim_stats(a: np.ndarray, b: np.ndarray) -> float:
    mx, my = a.mean(), b.mean()
    vx = ((a - mx) ** 2).mean()
    vy = ((b - my) ** 2).mean()
    cov = ((a - mx) * (b - my)).mean()
    num = (2 * mx * my + C1) * (2 * cov + C2)
    den = (mx * mx + my * my + C1) * (vx + vy + C2)
    return float(num / den)


def ssim(x, y, mode: str = "global") -> float:
    a, b = _pair(x, y)
    if mode == "global":
        return _ssim_stats(a, b)
    if mode != "windowed":
        raise ValueError(f"unknown ssim mode {mode!r}")
    h, w = a.shape
    vals = [
        _ssim_stats(a[r:r + SSIM_BLOCK, c:c + SSIM_BLOCK], b[r:r + SSIM_BLOCK, c:c + SSIM_BLOCK])
        for r in range(0, h, SSIM_BLOCK)
        for c in range(0, w, SSIM_BLOCK)
    ]
    return float(np.mean(vals))


@dataclass(frozen=True)
class MetricReport:
    mse: float
    psnr: float
    ssim: float

    def __post_init__(self):
        if self.mse < 0:
            raise ValueError("mse must be non-negative")
        if not -1.0 - 1e-12 <= self.ssim <= 1.0 + 1e-12:
            raise ValueError("ssim must lie in [-1, 1]")

    def cell(self) -> str:
        """Table cell ``PSNR,SSIM`` at two decimals."""
        return f"{format_psnr(self.psnr)},{self.ssim:.2f}"


def format_psnr(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.2f}"


def evaluate(restored, truth, ssim_mode: str = "global") -> MetricReport:
    err = mse(restored, truth)
    return MetricReport(err, psnr_from_mse(err), ssim(restored, truth, ssim_mode))
