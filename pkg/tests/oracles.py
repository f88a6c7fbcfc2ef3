"""Independent reference implementations used by the tests.

Each one is deliberately naive (plain Python loops, exhaustive search) and
shares no code with the package beyond reading model fields.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def pair_cost(lp, lq, lam, k, v_max):
    return lam * min(abs(int(lp) - int(lq)) ** k, v_max)


def energy(observed, mask, labels2d, lam=5, k=2, v_max=5):
    """Plain double sum over pixels and 4-neighbour pairs."""
    obs = np.asarray(observed)
    h, w = obs.shape
    lab = np.asarray(labels2d)
    total = 0
    for r in range(h):
        for c in range(w):
            if not mask[r][c]:
                total += (int(lab[r][c]) - int(obs[r][c])) ** 2
            if c + 1 < w:
                total += pair_cost(lab[r][c], lab[r][c + 1], lam, k, v_max)
            if r + 1 < h:
                total += pair_cost(lab[r][c], lab[r + 1][c], lam, k, v_max)
    return total


def model_energy(model, values):
    return energy(model.observed.pixels, model.mask.flags, values,
                  model.lam, model.k, model.v_max)


def all_labelings(model):
    h, w = model.shape
    for combo in itertools.product(model.labels.tolist(), repeat=h * w):
        yield np.array(combo, dtype=np.int64).reshape(h, w)


def global_minimum(model):
    return min(model_energy(model, lab) for lab in all_labelings(model))


def best_expansion(model, current, alpha):
    cur = np.asarray(current, dtype=np.int64).reshape(-1)
    best = math.inf
    for bits in itertools.product((0, 1), repeat=cur.size):
        cand = np.where(np.array(bits, bool), alpha, cur).reshape(model.shape)
        best = min(best, model_energy(model, cand))
    return best


def best_swap(model, current, alpha, beta):
    cur = np.asarray(current, dtype=np.int64).reshape(-1)
    idx = [i for i, v in enumerate(cur) if v in (alpha, beta)]
    best = math.inf
    for bits in itertools.product((alpha, beta), repeat=len(idx)):
        cand = cur.copy()
        cand[idx] = bits
        best = min(best, model_energy(model, cand.reshape(model.shape)))
    return best


def exhaustive_min_cut(n, edges, src, snk):
    """Minimum s-t cut by enumerating every side assignment.

    ``edges`` holds (u, v, cap_uv, cap_vu); ``side[i]`` True = source side.
    """
    best = math.inf
    for side in itertools.product((False, True), repeat=n):
        cut = 0
        for i in range(n):
            cut += snk[i] if side[i] else src[i]
        for u, v, cuv, cvu in edges:
            if side[u] and not side[v]:
                cut += cuv
            elif side[v] and not side[u]:
                cut += cvu
        best = min(best, cut)
    return best


def chain_optimum(data_rows, labels, lam, k, v_max):
    """Viterbi over a chain: data_rows[i][j] is the cost of label j at node i."""
    m = len(labels)
    f = list(data_rows[0])
    for i in range(1, len(data_rows)):
        f = [data_rows[i][b] + min(f[a] + pair_cost(labels[a], labels[b], lam, k, v_max)
                                   for a in range(m)) for b in range(m)]
    return min(f)


def ssim_stats(x, y, L=255.0):
    """SSIM from hand-written population statistics (pure Python floats)."""
    xs = [float(v) for v in np.asarray(x).ravel()]
    ys = [float(v) for v in np.asarray(y).ravel()]
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    vx = sum((a - mx) ** 2 for a in xs) / n
    vy = sum((b - my) ** 2 for b in ys) / n
    cxy = sum((a - mx) * (b - my) for a, b in zip(xs, ys)) / n
    c1 = (0.01 * L) ** 2
    c2 = (0.03 * L) ** 2
    return ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx ** 2 + my ** 2 + c1) * (vx + vy + c2))


def exhaustive_min_cut_np(n, edges, src, snk):
    """Vectorised form of ``exhaustive_min_cut`` for up to ~16 nodes."""
    sides = ((np.arange(2 ** n)[:, None] >> np.arange(n)) & 1).astype(bool)
    cut = (~sides) @ np.asarray(src, np.int64) + sides @ np.asarray(snk, np.int64)
    for u, v, cuv, cvu in edges:
        cut += cuv * (sides[:, u] & ~sides[:, v]) + cvu * (sides[:, v] & ~sides[:, u])
    return int(cut.min())


def all_energies_np(model):
    """Energy of every labeling of a tiny model, by brute-force broadcasting."""
    h, w = model.shape
    n = h * w
    labels = np.asarray(model.labels, np.int64)
    m = labels.size
    codes = (np.arange(m ** n)[:, None] // m ** np.arange(n)) % m
    vals = labels[codes]
    obs = model.observed.pixels.reshape(-1).astype(np.int64)
    keep = ~model.mask.flags.reshape(-1)
    e = (((vals - obs) ** 2) * keep).sum(1)

    def v(a, b):
        return model.lam * np.minimum(np.abs(a - b) ** model.k, model.v_max)

    grid = vals.reshape(-1, h, w)
    e = e + v(grid[:, :, 1:], grid[:, :, :-1]).sum((1, 2)) + v(grid[:, 1:], grid[:, :-1]).sum((1, 2))
    return e
