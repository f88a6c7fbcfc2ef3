"""Move-making optimizers: ICM, alpha-beta swap and alpha-expansion.

Expansion graph for label ``alpha`` (source side = "switch to alpha",
sink side = "keep current label"):

* one node per pixel, t-links carrying ``D_p(alpha)`` and ``D_p(l_p)``;
* neighbours with equal labels: one edge of weight ``V(l_p, alpha)``;
* neighbours with different labels: an auxiliary node joined to ``p`` by
  ``V(l_p, alpha)``, to ``q`` by ``V(alpha, l_q)`` and to the terminal by
  ``V(l_p, l_q)``.

The auxiliary gadget is exact only when ``V`` obeys the triangle inequality
on the triple ``(l_p, l_q, alpha)``. The truncated quadratic breaks that
(``V(0, 2) = 4 > V(0, 1) + V(1, 2) = 2``), so such pairs are encoded
directly as a two-variable term instead. If ``V(l_p, l_q)`` exceeds
``V(l_p, alpha) + V(alpha, l_q)`` it is first lowered to that sum so the
term is graph-representable. Lowering only the "both keep" cost means the
optimal move under the repaired energy never raises the true energy. Moves
are still accepted only on strict decrease of the true energy.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field

import numba
import numpy as np

from .energy import Labeling, MrfModel, check_labeling, energy_units
from .maxflow import FlowNetwork, _bk_solve


@dataclass(frozen=True)
class SolverConfig:
    max_cycles: int = 10
    improvement_epsilon: float = 0.0
    label_order: str = "ascending"
    seed: int = 0
    # message passing only: stop once |dE| / E falls below this
    relative_tolerance: float = 1e-4

    def __post_init__(self):
        if self.max_cycles < 1:
            raise ValueError("max_cycles must be >= 1")
        if self.improvement_epsilon < 0:
            raise ValueError("improvement_epsilon must be >= 0")
        if self.label_order not in ("ascending", "random"):
            raise ValueError("label_order must be 'ascending' or 'random'")


@dataclass
class ConvergenceTrace:
    """(cycle, energy, cumulative seconds); cycle 0 is the starting labeling."""

    samples: list = field(default_factory=list)

    def add(self, cycle, energy, seconds):
        self.samples.append((int(cycle), energy, float(seconds)))

    @property
    def energies(self):
        return [s[1] for s in self.samples]

    @property
    def final_energy(self):
        return self.samples[-1][1]

    @property
    def cycles(self) -> int:
        return self.samples[-1][0] if self.samples else 0

    def is_non_increasing(self) -> bool:
        e = self.energies
        return all(b <= a for a, b in zip(e, e[1:]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["cycle", "energy", "seconds"])
        for c, e, s in self.samples:
            w.writerow([c, e, f"{s:.6f}"])
        return buf.getvalue()


# -- compiled kernels -------------------------------------------------------

@numba.njit(cache=True, inline="always")
def _dcost(p, v, obs, mask, scale):
    if mask[p]:
        return 0
    d = v - obs[p]
    return d * d * scale


@numba.njit(cache=True)
def _delta_energy(old, new, h, w, obs, mask, pw, scale):
    """E(new) - E(old) in cost units, touching only changed pixels."""
    delta = 0
    n = h * w
    for p in range(n):
        if old[p] == new[p]:
            continue
        delta += _dcost(p, new[p], obs, mask, scale) - _dcost(p, old[p], obs, mask, scale)
        r = p // w
        c = p - r * w
        for k in range(4):
            if k == 0:
                if c == 0:
                    continue
                q = p - 1
            elif k == 1:
                if c == w - 1:
                    continue
                q = p + 1
            elif k == 2:
                if r == 0:
                    continue
                q = p - w
            else:
                if r == h - 1:
                    continue
                q = p + w
            if old[q] != new[q] and q < p:
                continue  # pair already counted from q
            delta += pw[abs(new[p] - new[q])] - pw[abs(old[p] - old[q])]
    return delta


@numba.njit(cache=True)
def _icm_sweep(lab, h, w, obs, mask, labels, pw, scale):
    changed = 0
    m = labels.shape[0]
    for p in range(h * w):
        r = p // w
        c = p - r * w
        best = np.int64(1) << 62
        bestv = lab[p]
        for j in range(m):
            v = labels[j]
            cost = _dcost(p, v, obs, mask, scale)
            if c > 0:
                cost += pw[abs(v - lab[p - 1])]
            if c < w - 1:
                cost += pw[abs(v - lab[p + 1])]
            if r > 0:
                cost += pw[abs(v - lab[p - w])]
            if r < h - 1:
                cost += pw[abs(v - lab[p + w])]
            if cost < best:
                best = cost
                bestv = v
        if bestv != lab[p]:
            lab[p] = bestv
            changed += 1
    return changed


@numba.njit(cache=True)
def _expansion_graph(lab, h, w, obs, mask, pw, scale, av):
    n = h * w
    npairs = h * (w - 1) + w * (h - 1)
    src = np.zeros(n + npairs, np.int64)
    snk = np.zeros(n + npairs, np.int64)
    eu = np.empty(2 * npairs, np.int64)
    ev = np.empty(2 * npairs, np.int64)
    cuv = np.empty(2 * npairs, np.int64)
    cvu = np.empty(2 * npairs, np.int64)
    ne = 0
    nodes = n
    const = 0
    for p in range(n):
        src[p] = _dcost(p, lab[p], obs, mask, scale)
        snk[p] = _dcost(p, av, obs, mask, scale)
    for t in range(npairs):
        if t < h * (w - 1):
            r = t // (w - 1)
            p = r * w + (t - r * (w - 1))
            q = p + 1
        else:
            p = t - h * (w - 1)
            q = p + w
        a = lab[p]
        b = lab[q]
        if a == b:
            cap = pw[abs(a - av)]
            if cap > 0:
                eu[ne] = p
                ev[ne] = q
                cuv[ne] = cap
                cvu[ne] = cap
                ne += 1
            continue
        A = pw[abs(a - b)]
        B = pw[abs(a - av)]
        C = pw[abs(av - b)]
        if A <= B + C and B <= A + C and C <= A + B:
            x = nodes
            nodes += 1
            src[x] = A
            eu[ne] = p
            ev[ne] = x
            cuv[ne] = B
            cvu[ne] = B
            ne += 1
            eu[ne] = x
            ev[ne] = q
            cuv[ne] = C
            cvu[ne] = C
            ne += 1
        else:
            if A > B + C:
                A = B + C
            const += A
            cp = C - A
            if cp >= 0:
                snk[p] += cp
            else:
                const += cp
                src[p] -= cp
            # coefficient -C on q: C paid when q stays on the sink side
            const -= C
            src[q] += C
            eu[ne] = p
            ev[ne] = q
            cuv[ne] = 0
            cvu[ne] = B + C - A
            ne += 1
    return (nodes, src[:nodes].copy(), snk[:nodes].copy(), eu[:ne].copy(),
            ev[:ne].copy(), cuv[:ne].copy(), cvu[:ne].copy(), const, nodes - n)


@numba.njit(cache=True)
def _swap_graph(vars_, lab, h, w, obs, mask, pw, scale, av, bv, node_of):
    nv = vars_.shape[0]
    src = np.zeros(nv, np.int64)
    snk = np.zeros(nv, np.int64)
    eu = np.empty(2 * nv, np.int64)
    ev = np.empty(2 * nv, np.int64)
    cap = np.empty(2 * nv, np.int64)
    for i in range(nv):
        node_of[vars_[i]] = i
    vab = pw[abs(av - bv)]
    ne = 0
    for i in range(nv):
        p = vars_[i]
        r = p // w
        c = p - r * w
        ca = _dcost(p, av, obs, mask, scale)
        cb = _dcost(p, bv, obs, mask, scale)
        for k in range(4):
            if k == 0:
                if c == 0:
                    continue
                q = p - 1
            elif k == 1:
                if c == w - 1:
                    continue
                q = p + 1
            elif k == 2:
                if r == 0:
                    continue
                q = p - w
            else:
                if r == h - 1:
                    continue
                q = p + w
            j = node_of[q]
            if j < 0:
                ca += pw[abs(av - lab[q])]
                cb += pw[abs(bv - lab[q])]
            elif j > i and vab > 0:
                eu[ne] = i
                ev[ne] = j
                cap[ne] = vab
                ne += 1
        snk[i] = ca
        src[i] = cb
    for i in range(nv):
        node_of[vars_[i]] = -1
    return src, snk, eu[:ne].copy(), ev[:ne].copy(), cap[:ne].copy()


# -- graph construction (public, for inspection and tests) ------------------

@dataclass
class ExpansionGraph:
    network: FlowNetwork
    constant: int  # cut capacity + constant = move energy in cost units
    n_pixels: int
    n_aux: int

    @property
    def node_census(self) -> int:
        """Terminals + pixel nodes + auxiliary nodes."""
        return 2 + self.n_pixels + self.n_aux


def _flat_values(labeling: Labeling) -> np.ndarray:
    return labeling.assignment.astype(np.int64).reshape(-1)


def expansion_graph(model: MrfModel, labeling: Labeling, alpha: int) -> ExpansionGraph:
    check_labeling(model, labeling)
    if model.label_index[int(alpha)] < 0:
        raise ValueError(f"alpha={alpha} is not in the label set")
    obs, mask, _, pw, scale = model.kernel_args()
    h, w = model.shape
    (nodes, src, snk, eu, ev, cuv, cvu, const, naux) = _expansion_graph(
        _flat_values(labeling), h, w, obs.reshape(-1), mask.reshape(-1), pw, scale, np.int64(alpha))
    net = FlowNetwork.from_arrays(nodes, src, snk, eu, ev, cuv, cvu)
    return ExpansionGraph(net, int(const), h * w, int(naux))


def _expand(lab, h, w, obs, mask, pw, scale, av):
    nodes, src, snk, eu, ev, cuv, cvu, const, naux = _expansion_graph(
        lab, h, w, obs, mask, pw, scale, av)
    _, side = _bk_solve(np.int64(nodes), src, snk, eu, ev, cuv, cvu)
    new = np.where(side[:h * w], av, lab)
    return new, _delta_energy(lab, new, h, w, obs, mask, pw, scale)


def _swap(vars_, lab, h, w, obs, mask, pw, scale, av, bv, node_of):
    src, snk, eu, ev, cap = _swap_graph(vars_, lab, h, w, obs, mask, pw, scale, av, bv, node_of)
    _, side = _bk_solve(np.int64(vars_.size), src, snk, eu, ev, cap, cap)
    new = lab.copy()
    new[vars_] = np.where(side, av, bv)
    return new, side, _delta_energy(lab, new, h, w, obs, mask, pw, scale)


def _prepare(model: MrfModel, labeling: Labeling):
    check_labeling(model, labeling)
    obs, mask, labels, pw, scale = model.kernel_args()
    return obs.reshape(-1), mask.reshape(-1), labels, pw, scale


def _result(model, lab):
    return Labeling(lab.reshape(model.shape).astype(np.uint8))


# -- public moves -----------------------------------------------------------

def expansion_move(model: MrfModel, labeling: Labeling, alpha: int):
    """Best labeling within one alpha-expansion of ``labeling``.

    Returns ``(labeling, energy)``; the energy never exceeds the input's.
    For metric potentials the result is the exact optimum of the move space.
    """
    obs, mask, _, pw, scale = _prepare(model, labeling)
    if model.label_index[int(alpha)] < 0:
        raise ValueError(f"alpha={alpha} is not in the label set")
    h, w = model.shape
    lab = _flat_values(labeling)
    new, delta = _expand(lab, h, w, obs, mask, pw, scale, np.int64(alpha))
    e0 = energy_units(model, labeling.assignment)
    if delta > 0:
        return labeling, model.to_energy(e0)
    return _result(model, new), model.to_energy(e0 + int(delta))


def swap_move(model: MrfModel, labeling: Labeling, alpha: int, beta: int):
    """Exact best relabeling of the alpha/beta pixels among {alpha, beta}."""
    obs, mask, _, pw, scale = _prepare(model, labeling)
    if alpha == beta:
        raise ValueError("alpha and beta must differ")
    for v in (alpha, beta):
        if model.label_index[int(v)] < 0:
            raise ValueError(f"label {v} is not in the label set")
    h, w = model.shape
    lab = _flat_values(labeling)
    vars_ = np.flatnonzero((lab == alpha) | (lab == beta))
    e0 = energy_units(model, labeling.assignment)
    if vars_.size == 0:
        return labeling, model.to_energy(e0)
    node_of = np.full(h * w, -1, np.int64)
    new, _, delta = _swap(vars_, lab, h, w, obs, mask, pw, scale,
                          np.int64(alpha), np.int64(beta), node_of)
    return _result(model, new), model.to_energy(e0 + int(delta))


# -- outer loops ------------------------------------------------------------

def _order(items, cfg: SolverConfig, rng):
    if cfg.label_order == "random":
        return [items[i] for i in rng.permutation(len(items))]
    return items


def _stop(cfg, model, before, after):
    return (before - after) < cfg.improvement_epsilon * model.cost_scale


def run_icm(model: MrfModel, init: Labeling, cfg: SolverConfig | None = None):
    """Raster-order coordinate descent; ties go to the smallest label."""
    cfg = cfg or SolverConfig()
    obs, mask, labels, pw, scale = _prepare(model, init)
    h, w = model.shape
    lab = _flat_values(init).copy()
    trace = ConvergenceTrace()
    t0 = time.perf_counter()
    e = energy_units(model, init.assignment)
    trace.add(0, model.to_energy(e), 0.0)
    for cycle in range(1, cfg.max_cycles + 1):
        before = e
        changed = _icm_sweep(lab, h, w, obs, mask, labels, pw, scale)
        e = energy_units(model, lab.reshape(h, w))
        trace.add(cycle, model.to_energy(e), time.perf_counter() - t0)
        if changed == 0 or _stop(cfg, model, before, e):
            break
    return _result(model, lab), trace


def run_expansion(model: MrfModel, init: Labeling, cfg: SolverConfig | None = None):
    """Cycle alpha over the label set, keeping each strictly improving move."""
    cfg = cfg or SolverConfig()
    obs, mask, labels, pw, scale = _prepare(model, init)
    h, w = model.shape
    rng = np.random.default_rng(cfg.seed)
    lab = _flat_values(init).copy()
    trace = ConvergenceTrace()
    t0 = time.perf_counter()
    e = energy_units(model, init.assignment)
    trace.add(0, model.to_energy(e), 0.0)
    for cycle in range(1, cfg.max_cycles + 1):
        before = e
        accepted = False
        for av in _order(list(labels), cfg, rng):
            new, delta = _expand(lab, h, w, obs, mask, pw, scale, np.int64(av))
            if delta < 0:
                lab = new
                e += int(delta)
                accepted = True
        trace.add(cycle, model.to_energy(e), time.perf_counter() - t0)
        if not accepted or _stop(cfg, model, before, e):
            break
    return _result(model, lab), trace


def run_swap(model: MrfModel, init: Labeling, cfg: SolverConfig | None = None):
    """Cycle over all unordered label pairs, keeping strictly improving swaps."""
    cfg = cfg or SolverConfig()
    obs, mask, labels, pw, scale = _prepare(model, init)
    h, w = model.shape
    rng = np.random.default_rng(cfg.seed)
    lab = _flat_values(init).copy()
    node_of = np.full(h * w, -1, np.int64)
    idx = model.label_index[lab]
    order = np.argsort(idx, kind="stable")
    bounds = np.searchsorted(idx[order], np.arange(labels.size + 1))
    buckets = [order[bounds[i]:bounds[i + 1]] for i in range(labels.size)]
    pairs = [(i, j) for i in range(labels.size) for j in range(i + 1, labels.size)]

    trace = ConvergenceTrace()
    t0 = time.perf_counter()
    e = energy_units(model, init.assignment)
    trace.add(0, model.to_energy(e), 0.0)
    for cycle in range(1, cfg.max_cycles + 1):
        before = e
        accepted = False
        for i, j in _order(pairs, cfg, rng):
            if buckets[i].size == 0 and buckets[j].size == 0:
                continue
            vars_ = np.sort(np.concatenate([buckets[i], buckets[j]]))
            new, side, delta = _swap(vars_, lab, h, w, obs, mask, pw, scale,
                                     labels[i], labels[j], node_of)
            if delta < 0:
                lab = new
                e += int(delta)
                accepted = True
                buckets[i] = vars_[side]
                buckets[j] = vars_[~side]
        trace.add(cycle, model.to_energy(e), time.perf_counter() - t0)
        if not accepted or _stop(cfg, model, before, e):
            break
    return _result(model, lab), trace
