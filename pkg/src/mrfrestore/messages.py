"""Min-sum message passing on the 4-connected grid: BP-S, BP-M and TRW-S.

Messages are integer cost vectors normalised to minimum 0. A message update
``out(l_q) = min_{l_p} h(l_p) + lam * min(|l_p - l_q|**k, v_max)`` takes
O(m) time: a distance transform over the label values (lower envelope of
cones for k = 1, of parabolas for k = 2), then a clamp at
``min(h) + lam * v_max``.

TRW-S decomposes the grid into row chains and column chains. Each node's
belief is split between its two chains. The row chain gets
``floor(belief / 2)`` and the column chain gets the rest; a one-row or
one-column image gives the whole belief to its single chain. The split
parts sum exactly to the belief, so all TRW-S arithmetic stays integral.
Costs are held in fixed point with ``TRWS_SCALE`` sub-units per cost unit,
which keeps the floor rounding far below one cost unit. The lower bound is
the sum of the exact chain minima under the current reparameterisation.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field

import numba
import numpy as np

from .energy import Labeling, MrfModel, check_labeling, energy_units
from .moves import ConvergenceTrace, SolverConfig

TRWS_SCALE = 256



@dataclass
class LowerBoundTrace:
    samples: list = field(default_factory=list)

    def add(self, pass_index, bound):
        self.samples.append((int(pass_index), bound))

    @property
    def bounds(self):
        return [b for _, b in self.samples]

    def is_non_decreasing(self) -> bool:
        b = self.bounds
        return all(y >= x for x, y in zip(b, b[1:]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["pass", "lower_bound"])
        for p, b in self.samples:
            w.writerow([p, repr(float(b))])
        return buf.getvalue()


DEFAULT_MP_CONFIG = SolverConfig(max_cycles=50, relative_tolerance=1e-4)


# -- distance transform -----------------------------------------------------

@numba.njit(cache=True)
def _dt(h, labels, c, k, trunc, out, v, z):
    """out[q] = min_j h[j] + min(c*|x_q - x_j|**k, trunc), unnormalised."""
    m = h.shape[0]
    hmin = h[0]
    for j in range(1, m):
        if h[j] < hmin:
            hmin = h[j]
    if c == 0:
        for q in range(m):
            out[q] = hmin
        return
    if k == 1:
        out[0] = h[0]
        for j in range(1, m):
            cand = out[j - 1] + c * (labels[j] - labels[j - 1])
            out[j] = h[j] if h[j] < cand else cand
        for j in range(m - 2, -1, -1):
            cand = out[j + 1] + c * (labels[j + 1] - labels[j])
            if cand < out[j]:
                out[j] = cand
    else:
        # lower envelope of parabolas c*(x - x_j)^2 + h[j]
        kk = 0
        v[0] = 0
        z[0] = -np.inf
        z[1] = np.inf
        for j in range(1, m):
            xj = labels[j]
            fj = h[j] + c * xj * xj
            i = v[kk]
            s = (fj - (h[i] + c * labels[i] * labels[i])) / (2.0 * c * (xj - labels[i]))
            while s <= z[kk]:  # z[0] = -inf stops this
                kk -= 1
                i = v[kk]
                s = (fj - (h[i] + c * labels[i] * labels[i])) / (2.0 * c * (xj - labels[i]))
            kk += 1
            v[kk] = j
            z[kk] = s
            z[kk + 1] = np.inf
        kk = 0
        for q in range(m):
            xq = labels[q]
            while z[kk + 1] < xq:
                kk += 1
            d = xq - labels[v[kk]]
            out[q] = h[v[kk]] + c * d * d
    cap = hmin + trunc
    for q in range(m):
        if out[q] > cap:
            out[q] = cap


@numba.njit(cache=True)
def _normalize(out):
    mn = out[0]
    for q in range(1, out.shape[0]):
        if out[q] < mn:
            mn = out[q]
    for q in range(out.shape[0]):
        out[q] -= mn
    return mn


def message_update(data_vec, incoming=(), labels=None, lam=5, k=2, v_max=5):
    """One min-sum message, normalised so its minimum is 0.

    ``h = data_vec + sum(incoming)`` must already exclude the message coming
    back from the receiving node.
    """
    h = np.asarray(data_vec)
    m = h.shape[0]
    for vec in incoming:
        vec = np.asarray(vec)
        if vec.shape != (m,):
            raise ValueError(f"incoming message length {vec.shape} != {m}")
        h = h + vec
    if labels is None:
        labels = np.arange(m, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (m,):
        raise ValueError("labels and cost vectors differ in length")
    if k not in (1, 2):
        raise ValueError("k must be 1 or 2")
    integral = (np.issubdtype(h.dtype, np.integer) and float(lam).is_integer()
                and float(lam * v_max).is_integer())
    dtype = np.int64 if integral else np.float64
    h = h.astype(dtype)
    out = np.empty(m, dtype)
    c = dtype(lam)
    trunc = dtype(lam * v_max)
    _dt(h, labels, c, np.int64(k), trunc, out, np.empty(m, np.int64), np.empty(m + 1))
    _normalize(out)
    return out


def brute_force_message(h, labels, lam, k, v_max):
    """O(m^2) reference: direct minimisation over the sending label."""
    h = np.asarray(h)
    labels = np.asarray(labels, dtype=np.int64)
    d = np.abs(labels[:, None] - labels[None, :]) ** k
    full = h[:, None] + lam * np.minimum(d, v_max)
    out = full.min(axis=0)
    return out - out.min()


# -- BP kernels ---------------------------------------------------------------

@numba.njit(cache=True, inline="always")
def _belief(p, msg, obs, mask, labels, scale, unit, hbuf):
    m = labels.shape[0]
    for j in range(m):
        if mask[p]:
            d = 0
        else:
            t = labels[j] - obs[p]
            d = t * t * scale * unit
        hbuf[j] = d + msg[0, p, j] + msg[1, p, j] + msg[2, p, j] + msg[3, p, j]


@numba.njit(cache=True)
def _send(hbuf, exclude, labels, c, k, trunc, tmp, out_row, v, z):
    m = labels.shape[0]
    for j in range(m):
        tmp[j] = hbuf[j] - exclude[j]
    res = tmp[m:]
    _dt(tmp[:m], labels, c, k, trunc, res, v, z)
    _normalize(res)
    for j in range(m):
        out_row[j] = res[j]


@numba.njit(cache=True)
def _bp_s_pass(msg, h, w, obs, mask, labels, c, k, trunc, scale):
    m = labels.shape[0]
    hbuf = np.empty(m, np.int64)
    tmp = np.empty(2 * m, np.int64)
    v = np.empty(m, np.int64)
    z = np.empty(m + 1)
    n = h * w
    for p in range(n):
        r = p // w
        col = p - r * w
        _belief(p, msg, obs, mask, labels, scale, 1, hbuf)
        if col < w - 1:
            _send(hbuf, msg[1, p], labels, c, k, trunc, tmp, msg[0, p + 1], v, z)
        if r < h - 1:
            _send(hbuf, msg[3, p], labels, c, k, trunc, tmp, msg[2, p + w], v, z)
    for p in range(n - 1, -1, -1):
        r = p // w
        col = p - r * w
        _belief(p, msg, obs, mask, labels, scale, 1, hbuf)
        if col > 0:
            _send(hbuf, msg[0, p], labels, c, k, trunc, tmp, msg[1, p - 1], v, z)
        if r > 0:
            _send(hbuf, msg[2, p], labels, c, k, trunc, tmp, msg[3, p - w], v, z)


@numba.njit(cache=True)
def _bp_m_pass(msg, h, w, obs, mask, labels, c, k, trunc, scale):
    """Synchronous update: every new message is computed from last pass's.

    Rows are processed top to bottom; messages into the current and next
    row are held back in small buffers until no one needs the old values.
    """
    m = labels.shape[0]
    hbuf = np.empty(m, np.int64)
    tmp = np.empty(2 * m, np.int64)
    v = np.empty(m, np.int64)
    z = np.empty(m + 1)
    horiz = np.zeros((2, w, m), msg.dtype)
    pending = np.zeros((w, m), msg.dtype)
    nextdown = np.zeros((w, m), msg.dtype)
    for r in range(h):
        for col in range(w):
            p = r * w + col
            _belief(p, msg, obs, mask, labels, scale, 1, hbuf)
            if col < w - 1:
                _send(hbuf, msg[1, p], labels, c, k, trunc, tmp, horiz[0, col + 1], v, z)
            if col > 0:
                _send(hbuf, msg[0, p], labels, c, k, trunc, tmp, horiz[1, col - 1], v, z)
            if r > 0:
                # row r-1 is finished, so its incoming field can be overwritten
                _send(hbuf, msg[2, p], labels, c, k, trunc, tmp, msg[3, p - w], v, z)
            if r < h - 1:
                _send(hbuf, msg[3, p], labels, c, k, trunc, tmp, nextdown[col], v, z)
        for col in range(w):
            p = r * w + col
            if col > 0:
                msg[0, p] = horiz[0, col]
            if col < w - 1:
                msg[1, p] = horiz[1, col]
            if r > 0:
                msg[2, p] = pending[col]
        pending, nextdown = nextdown, pending


@numba.njit(cache=True)
def _decode(msg, h, w, obs, mask, labels, scale, unit, out):
    m = labels.shape[0]
    hbuf = np.empty(m, np.int64)
    for p in range(h * w):
        _belief(p, msg, obs, mask, labels, scale, unit, hbuf)
        best = 0
        for j in range(1, m):
            if hbuf[j] < hbuf[best]:
                best = j
        out[p] = labels[best]


# -- TRW-S kernels ------------------------------------------------------------

@numba.njit(cache=True, inline="always")
def _row_part(x, h, w):
    if h == 1:
        return x
    if w == 1:
        return 0
    return x >> 1  # floor division, also for negative values


@numba.njit(cache=True)
def _trws_pass(msg, h, w, obs, mask, labels, c, k, trunc, scale, unit):
    m = labels.shape[0]
    hbuf = np.empty(m, np.int64)
    rowb = np.empty(m, np.int64)
    colb = np.empty(m, np.int64)
    tmp = np.empty(2 * m, np.int64)
    v = np.empty(m, np.int64)
    z = np.empty(m + 1)
    n = h * w
    for sweep in range(2):
        for t in range(n):
            p = t if sweep == 0 else n - 1 - t
            r = p // w
            col = p - r * w
            _belief(p, msg, obs, mask, labels, scale, unit, hbuf)
            for j in range(m):
                rowb[j] = _row_part(hbuf[j], h, w)
                colb[j] = hbuf[j] - rowb[j]
            if sweep == 0:
                if col < w - 1:
                    _send(rowb, msg[1, p], labels, c, k, trunc, tmp, msg[0, p + 1], v, z)
                if r < h - 1:
                    _send(colb, msg[3, p], labels, c, k, trunc, tmp, msg[2, p + w], v, z)
            else:
                if col > 0:
                    _send(rowb, msg[0, p], labels, c, k, trunc, tmp, msg[1, p - 1], v, z)
                if r > 0:
                    _send(colb, msg[2, p], labels, c, k, trunc, tmp, msg[3, p - w], v, z)


@numba.njit(cache=True)
def _trws_bound(msg, h, w, obs, mask, labels, c, k, trunc, scale, unit):
    """Sum over row and column chains of the exact chain minimum."""
    m = labels.shape[0]
    hbuf = np.empty(m, np.int64)
    f = np.empty(m, np.int64)
    g = np.empty(m, np.int64)
    res = np.empty(m, np.int64)
    v = np.empty(m, np.int64)
    z = np.empty(m + 1)
    total = np.int64(0)
    for chain_kind in range(2):
        n_chains = h if chain_kind == 0 else w
        length = w if chain_kind == 0 else h
        for ch in range(n_chains):
            for t in range(length):
                p = ch * w + t if chain_kind == 0 else t * w + ch
                _belief(p, msg, obs, mask, labels, scale, unit, hbuf)
                for j in range(m):
                    rp = _row_part(hbuf[j], h, w)
                    g[j] = rp if chain_kind == 0 else hbuf[j] - rp
                if t == 0:
                    for j in range(m):
                        f[j] = g[j]
                    continue
                prev = p - 1 if chain_kind == 0 else p - w
                back = 1 if chain_kind == 0 else 3   # message q -> prev
                fwd = 0 if chain_kind == 0 else 2    # message prev -> q
                for j in range(m):
                    f[j] -= msg[back, prev, j]
                _dt(f, labels, c, k, trunc, res, v, z)
                for j in range(m):
                    f[j] = g[j] + res[j] - msg[fwd, p, j]
            mn = f[0]
            for j in range(1, m):
                if f[j] < mn:
                    mn = f[j]
            total += mn
    return total


# -- drivers ------------------------------------------------------------------

def _setup(model: MrfModel, init: Labeling, unit: int):
    check_labeling(model, init)
    h, w = model.shape
    obs, mask, labels, pw, scale = model.kernel_args()
    c = np.int64(model.lam_scaled * unit)
    trunc = np.int64(model.trunc_scaled * unit)
    biggest = (255 ** 2 * scale + 4 * trunc) * unit
    if biggest >= 2 ** 62 or trunc >= 2 ** 31:
        raise OverflowError("costs too large for integer message passing")
    msg = np.zeros((4, h * w, labels.size), np.int32)
    return h, w, obs.reshape(-1), mask.reshape(-1), labels, c, np.int64(model.k), trunc, scale, msg


@dataclass
class MessageField:
    """Four directed message fields, ``values[d, p]`` = message into ``p``.

    ``d`` is the side the message arrives from: 0 left, 1 right, 2 up,
    3 down. ``unit`` is the fixed-point multiplier the values carry.
    """

    values: np.ndarray
    unit: int = 1

    def is_normalized(self) -> bool:
        mins = self.values.min(axis=2)
        return bool(np.all(mins == 0))

    def decode(self, model: MrfModel) -> Labeling:
        h, w = model.shape
        obs, mask, labels, _, scale = model.kernel_args()
        lab = np.empty(h * w, np.int64)
        _decode(self.values, h, w, obs.reshape(-1), mask.reshape(-1), labels,
                scale, np.int64(self.unit), lab)
        return Labeling(lab.reshape(h, w).astype(np.uint8))


def propagate(model: MrfModel, passes: int = 1, schedule: str = "bps") -> MessageField:
    """Run ``passes`` message-passing passes from zero messages.

    ``schedule`` is ``"bps"``, ``"bpm"`` or ``"trws"``.
    """
    init = Labeling(np.full(model.shape, model.labels[0], np.uint8))
    unit = TRWS_SCALE if schedule == "trws" else 1
    h, w, obs, mask, labels, c, k, trunc, scale, msg = _setup(model, init, unit)
    for _ in range(passes):
        if schedule == "bps":
            _bp_s_pass(msg, h, w, obs, mask, labels, c, k, trunc, scale)
        elif schedule == "bpm":
            _bp_m_pass(msg, h, w, obs, mask, labels, c, k, trunc, scale)
        elif schedule == "trws":
            _trws_pass(msg, h, w, obs, mask, labels, c, k, trunc, scale, np.int64(unit))
        else:
            raise ValueError(f"unknown schedule {schedule!r}")
    return MessageField(msg, unit)


def certifies_optimum(lower_bound, energy) -> bool:
    """A labeling whose energy meets a valid lower bound is a global minimum."""
    return lower_bound >= energy


def _converged(cfg, prev, cur):
    return abs(prev - cur) < cfg.relative_tolerance * max(abs(prev), 1)


def run_bp(model: MrfModel, init: Labeling, cfg: SolverConfig | None = None,
           schedule: str = "bps"):
    """Loopy min-sum BP; ``schedule`` is ``"bps"`` (sequential) or ``"bpm"`` (synchronous)."""
    cfg = cfg or DEFAULT_MP_CONFIG
    if schedule not in ("bps", "bpm"):
        raise ValueError(f"unknown schedule {schedule!r}")
    h, w, obs, mask, labels, c, k, trunc, scale, msg = _setup(model, init, 1)
    step = _bp_s_pass if schedule == "bps" else _bp_m_pass
    lab = np.empty(h * w, np.int64)
    trace = ConvergenceTrace()
    t0 = time.perf_counter()
    e = energy_units(model, init.assignment)
    trace.add(0, model.to_energy(e), 0.0)
    for it in range(1, cfg.max_cycles + 1):
        step(msg, h, w, obs, mask, labels, c, k, trunc, scale)
        _decode(msg, h, w, obs, mask, labels, scale, 1, lab)
        prev, e = e, energy_units(model, lab.reshape(h, w))
        trace.add(it, model.to_energy(e), time.perf_counter() - t0)
        if it > 1 and _converged(cfg, prev, e):
            break
    return Labeling(lab.reshape(h, w).astype(np.uint8)), trace


def run_trws(model: MrfModel, init: Labeling, cfg: SolverConfig | None = None):
    """Sequential tree-reweighted message passing over row/column chains.

    Returns ``(labeling, energy trace, lower-bound trace)``; bounds are in
    energy units (multiples of ``1 / TRWS_SCALE``).
    """
    cfg = cfg or DEFAULT_MP_CONFIG
    unit = TRWS_SCALE
    h, w, obs, mask, labels, c, k, trunc, scale, msg = _setup(model, init, unit)
    lab = np.empty(h * w, np.int64)
    trace = ConvergenceTrace()
    bounds = LowerBoundTrace()
    t0 = time.perf_counter()
    e = energy_units(model, init.assignment)
    trace.add(0, model.to_energy(e), 0.0)
    for it in range(1, cfg.max_cycles + 1):
        _trws_pass(msg, h, w, obs, mask, labels, c, k, trunc, scale, np.int64(unit))
        _decode(msg, h, w, obs, mask, labels, scale, unit, lab)
        prev, e = e, energy_units(model, lab.reshape(h, w))
        trace.add(it, model.to_energy(e), time.perf_counter() - t0)
        lb = int(_trws_bound(msg, h, w, obs, mask, labels, c, k, trunc, scale, np.int64(unit)))
        bounds.add(it, lb / (unit * scale))
        if certifies_optimum(lb, e * unit):
            break
        if it > 1 and _converged(cfg, prev, e):
            break
    return Labeling(lab.reshape(h, w).astype(np.uint8)), trace, bounds
