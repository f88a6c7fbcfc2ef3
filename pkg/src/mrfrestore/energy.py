"""Inpainting MRF: label set, data and truncated smoothness costs, total energy.

Energy of a labeling ``l``::

    E(l) = sum_p D_p(l_p) + lam * sum_{p~q} min(|l_p - l_q|**k, v_max)

with ``D_p(l) = (l - I_p)**2`` on observed pixels and 0 on masked ones, over
the 4-connected grid (each unordered neighbour pair counted once).

All solvers work in integer "cost units": every cost is multiplied by
``model.cost_scale`` (1 whenever ``lam`` and ``lam * v_max`` are integral,
as at the defaults) so energies are exact 64-bit integers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .image_core import ImageGrid, as_grid
from .noise import PixelMask

DEFAULT_LAMBDA = 5
DEFAULT_K = 2
DEFAULT_VMAX = 5
ALL_LABELS = np.arange(256, dtype=np.int64)


class PixelCoord(NamedTuple):
    row: int
    col: int


def labels_with_stride(stride: int = 1) -> np.ndarray:
    if stride < 1:
        raise ValueError("label stride must be >= 1")
    return np.arange(0, 256, stride, dtype=np.int64)


def _scale_for(values) -> int:
    """Smallest power-of-ten multiplier making every value integral."""
    for exp in range(7):
        s = 10 ** exp
        if all(abs(v * s - round(v * s)) < 1e-9 * max(1.0, abs(v * s)) for v in values):
            return s
    raise ValueError("lambda / v_max need more than 6 decimal digits; cannot use integer costs")


@dataclass(frozen=True, eq=False)
class MrfModel:
    observed: ImageGrid
    mask: PixelMask
    lam: float = DEFAULT_LAMBDA
    k: int = DEFAULT_K
    v_max: float = DEFAULT_VMAX
    labels: np.ndarray = field(default_factory=lambda: ALL_LABELS.copy())

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if labels.size == 0:
            raise ValueError("label set is empty")
        if np.any(np.diff(labels) <= 0):
            raise ValueError("labels must be strictly increasing")
        if labels[0] < 0 or labels[-1] > 255:
            raise ValueError("labels must lie in [0, 255]")
        labels = labels.copy()
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        if self.observed.shape != self.mask.shape:
            raise ValueError(f"observed {self.observed.shape} and mask {self.mask.shape} differ")
        if self.k not in (1, 2):
            raise ValueError("k must be 1 or 2")
        if self.lam < 0 or self.v_max < 0:
            raise ValueError("lambda and v_max must be non-negative")

        scale = _scale_for([self.lam, self.lam * self.v_max])
        object.__setattr__(self, "cost_scale", scale)
        d = np.arange(256, dtype=np.int64)
        lam_s = int(round(self.lam * scale))
        trunc_s = int(round(self.lam * self.v_max * scale))
        # lam*scale*min(d^k, v_max) == min(lam_s*d^k, trunc_s); both integral
        pw = np.minimum(lam_s * d ** self.k, trunc_s).astype(np.int64)
        pw.setflags(write=False)
        object.__setattr__(self, "pairwise_table", pw)
        object.__setattr__(self, "lam_scaled", lam_s)
        object.__setattr__(self, "trunc_scaled", trunc_s)
        lut = np.full(256, -1, dtype=np.int64)
        lut[labels] = np.arange(labels.size)
        lut.setflags(write=False)
        object.__setattr__(self, "label_index", lut)

    @property
    def height(self) -> int:
        return self.observed.height

    @property
    def width(self) -> int:
        return self.observed.width

    @property
    def shape(self):
        return self.observed.shape

    @property
    def n_labels(self) -> int:
        return int(self.labels.size)

    def to_energy(self, units: int):
        """Convert integer cost units back to energy (exact int at scale 1)."""
        if self.cost_scale == 1:
            return int(units)
        return units / self.cost_scale

    def data_table(self) -> np.ndarray:
        """Full (H, W, m) data-cost table in cost units."""
        obs = self.observed.pixels.astype(np.int64)[..., None]
        table = (self.labels[None, None, :] - obs) ** 2 * self.cost_scale
        table[self.mask.flags] = 0
        return table

    def kernel_args(self):
        """Arrays passed to the compiled solver kernels."""
        return (
            self.observed.pixels.astype(np.int64),
            self.mask.flags.astype(np.bool_),
            self.labels,
            self.pairwise_table,
            np.int64(self.cost_scale),
        )


@dataclass(frozen=True, eq=False)
class Labeling:
    """One label value per pixel, stored as a read-only (H, W) uint8 array."""

    assignment: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.assignment)
        if arr.ndim != 2:
            raise ValueError("labeling must be 2-D")
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ValueError("label values must lie in [0, 255]")
        arr = np.array(arr, dtype=np.uint8, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "assignment", arr)

    @property
    def shape(self):
        return self.assignment.shape

    def __array__(self, dtype=None, copy=None):
        return self.assignment if dtype is None else self.assignment.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, Labeling):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.assignment, other.assignment))

    def __hash__(self):
        return hash((self.shape, self.assignment.tobytes()))

    def to_image(self) -> ImageGrid:
        return ImageGrid(self.assignment)


def build_model(observed, mask=None, lam=DEFAULT_LAMBDA, k=DEFAULT_K,
                v_max=DEFAULT_VMAX, labels=None) -> MrfModel:
    """Assemble an inpainting model; ``mask=None`` means nothing is missing."""
    observed = as_grid(observed)
    if mask is None:
        mask = PixelMask(np.zeros(observed.shape, dtype=bool))
    elif not isinstance(mask, PixelMask):
        mask = PixelMask(np.asarray(mask, dtype=bool))
    if labels is None:
        labels = ALL_LABELS.copy()
    return MrfModel(observed, mask, lam, k, v_max, labels)


def check_labeling(model: MrfModel, labeling: Labeling) -> np.ndarray:
    """Validate and return the labeling as an (H, W) array of label indices."""
    if labeling.shape != model.shape:
        raise ValueError(f"labeling {labeling.shape} does not match model {model.shape}")
    idx = model.label_index[labeling.assignment]
    if np.any(idx < 0):
        raise ValueError("labeling uses values outside the model's label set")
    return idx


def data_cost(model: MrfModel, p, label):
    r, c = p
    if not (0 <= r < model.height and 0 <= c < model.width):
        raise IndexError(f"pixel {tuple(p)} outside {model.height}x{model.width} grid")
    if label < 0 or label > 255 or model.label_index[int(label)] < 0:
        raise ValueError(f"label {label} not in the model's label set")
    if model.mask.flags[r, c]:
        return 0
    return (int(label) - int(model.observed.pixels[r, c])) ** 2


def smoothness_cost(model: MrfModel, lp, lq):
    """``min(|lp - lq|**k, v_max)``, not yet multiplied by lambda."""
    d = abs(int(lp) - int(lq)) ** model.k
    v = min(d, model.v_max)
    return int(v) if float(v).is_integer() else v


def neighbor_pairs(model_or_shape) -> np.ndarray:
    """All 4-connected unordered pairs as flat-index rows ``(p, q)``, p < q.

    Horizontal pairs come first (raster order), then vertical ones.
    """
    if isinstance(model_or_shape, MrfModel):
        h, w = model_or_shape.shape
    else:
        h, w = model_or_shape
    idx = np.arange(h * w, dtype=np.int64).reshape(h, w)
    horiz = np.stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()], axis=1)
    vert = np.stack([idx[:-1, :].ravel(), idx[1:, :].ravel()], axis=1)
    return np.concatenate([horiz, vert]).reshape(-1, 2)


def energy_units(model: MrfModel, values: np.ndarray) -> int:
    """Energy of an (H, W) array of label values, in integer cost units."""
    v = values.astype(np.int64)
    obs = model.observed.pixels.astype(np.int64)
    data = np.where(model.mask.flags, 0, (v - obs) ** 2).sum() * model.cost_scale
    pw = model.pairwise_table
    smooth = pw[np.abs(v[:, 1:] - v[:, :-1])].sum() + pw[np.abs(v[1:, :] - v[:-1, :])].sum()
    return int(data) + int(smooth)


def energy_terms(model: MrfModel, labeling: Labeling):
    """(data units, pairwise units) for a labeling; sum is the total energy."""
    check_labeling(model, labeling)
    v = labeling.assignment.astype(np.int64)
    obs = model.observed.pixels.astype(np.int64)
    data = int(np.where(model.mask.flags, 0, (v - obs) ** 2).sum()) * model.cost_scale
    return data, energy_units(model, labeling.assignment) - data


def total_energy(model: MrfModel, labeling: Labeling):
    check_labeling(model, labeling)
    return model.to_energy(energy_units(model, labeling.assignment))


def snap_to_labels(model: MrfModel, values) -> np.ndarray:
    """Nearest label value for each entry (ties go to the smaller label)."""
    values = np.asarray(values, dtype=np.int64)
    labels = model.labels
    pos = np.clip(np.searchsorted(labels, values), 0, labels.size - 1)
    lower = labels[np.maximum(pos - 1, 0)]
    upper = labels[pos]
    pick = np.where(np.abs(values - lower) <= np.abs(upper - values), lower, upper)
    return pick.astype(np.uint8)


def _neighbor_median(obs: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Fill each masked pixel with the median of the nearest known pixels.

    The square window grows until it holds at least one known pixel; with no
    known pixels at all the image becomes mid-gray.
    """
    out = obs.astype(np.int64).copy()
    if not mask.any():
        return out
    if mask.all():
        out[:] = 128
        return out
    h, w = obs.shape
    rows, cols = np.nonzero(mask)
    for r, c in zip(rows, cols):
        rad = 1
        while True:
            win = obs[max(r - rad, 0):r + rad + 1, max(c - rad, 0):c + rad + 1]
            known = win[~mask[max(r - rad, 0):r + rad + 1, max(c - rad, 0):c + rad + 1]]
            if known.size:
                out[r, c] = int(np.median(known))
                break
            rad += 1
    return out


def initial_labeling(model: MrfModel, kind: str = "observed") -> Labeling:
    """Starting labeling: ``observed`` (default), ``midgray`` or ``median``."""
    obs = model.observed.pixels
    if kind == "observed":
        values = obs
    elif kind == "midgray":
        values = np.full(obs.shape, 128)
    elif kind == "median":
        values = _neighbor_median(obs, model.mask.flags)
    else:
        raise ValueError(f"unknown init {kind!r}")
    return Labeling(snap_to_labels(model, values))
