"""Salt-and-pepper corruption, min/max detection and inpainting masks.

Corruption draws one uniform ``u`` per pixel from numpy's PCG64 generator
(``numpy.random.default_rng(seed)``) and maps it to three outcomes::

    u < P          -> 0   (pepper)
    P <= u < P + Q -> 255 (salt)
    otherwise      -> unchanged
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image_core import MAXVAL, ImageGrid, as_grid

L_MIN = 0
L_MAX = MAXVAL


@dataclass(frozen=True)
class NoiseSpec:
    p_pepper: float
    q_salt: float
    seed: int = 0

    def __post_init__(self):
        for name in ("p_pepper", "q_salt"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.p_pepper + self.q_salt > 1.0 + 1e-12:
            raise ValueError("p_pepper + q_salt must not exceed 1")

    @classmethod
    def symmetric(cls, level: float, seed: int = 0) -> "NoiseSpec":
        """Split a noise level R evenly: P = Q = R/2."""
        if not 0.0 <= level <= 1.0:
            raise ValueError(f"noise level {level} outside [0, 1]")
        return cls(level / 2.0, level / 2.0, seed)

    @property
    def level(self) -> float:
        return self.p_pepper + self.q_salt


@dataclass(frozen=True, eq=False)
class PixelMask:
    """Boolean grid, True = corrupted/missing (to be inpainted)."""

    flags: np.ndarray

    def __post_init__(self):
        arr = np.array(self.flags, dtype=bool, copy=True)
        if arr.ndim != 2:
            raise ValueError("mask must be 2-D")
        arr.setflags(write=False)
        object.__setattr__(self, "flags", arr)

    @property
    def height(self) -> int:
        return self.flags.shape[0]

    @property
    def width(self) -> int:
        return self.flags.shape[1]

    @property
    def shape(self):
        return self.flags.shape

    def __array__(self, dtype=None, copy=None):
        return self.flags if dtype is None else self.flags.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, PixelMask):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.flags, other.flags))

    def __hash__(self):
        return hash((self.shape, self.flags.tobytes()))

    def count(self) -> int:
        return int(self.flags.sum())

    def density(self) -> float:
        return self.count() / self.flags.size

    def to_grid(self) -> ImageGrid:
        """PGM view of the mask: 0 = known, 255 = missing."""
        return ImageGrid(np.where(self.flags, 255, 0).astype(np.uint8))

    @classmethod
    def from_grid(cls, grid) -> "PixelMask":
        return cls(np.asarray(as_grid(grid).pixels) >= 128)


def corruption_draws(shape, spec: NoiseSpec) -> np.ndarray:
    """Per-pixel outcome codes: 0 untouched, 1 pepper, 2 salt."""
    u = np.random.default_rng(spec.seed).random(shape)
    codes = np.zeros(shape, dtype=np.uint8)
    codes[u < spec.p_pepper] = 1
    codes[(u >= spec.p_pepper) & (u < spec.p_pepper + spec.q_salt)] = 2
    return codes


def corrupt(image, spec: NoiseSpec) -> ImageGrid:
    image = as_grid(image)
    codes = corruption_draws(image.shape, spec)
    out = image.pixels.copy()
    out[codes == 1] = L_MIN
    out[codes == 2] = L_MAX
    return ImageGrid(out)


def detect_min_max(image) -> PixelMask:
    px = as_grid(image).pixels
    return PixelMask((px == L_MIN) | (px == L_MAX))


def build_superres_problem(low, factor: int = 2) -> tuple[ImageGrid, PixelMask]:
    """Scatter low-res pixels onto a ``factor``-times finer grid.

    Known pixels land at ``(r*factor, c*factor)``; every other pixel is 0 and
    flagged missing, so the mask density is exactly ``1 - 1/factor**2``.
    """
    if factor < 2:
        raise ValueError("factor must be >= 2")
    low = as_grid(low)
    h, w = low.shape
    hi = np.zeros((h * factor, w * factor), dtype=np.uint8)
    hi[::factor, ::factor] = low.pixels
    mask = np.ones(hi.shape, dtype=bool)
    mask[::factor, ::factor] = False
    return ImageGrid(hi), PixelMask(mask)


def decimate(image, factor: int = 2) -> ImageGrid:
    """Keep every ``factor``-th pixel in each direction, no prefilter."""
    if factor < 1:
        raise ValueError("factor must be >= 1")
    return ImageGrid(as_grid(image).pixels[::factor, ::factor])
