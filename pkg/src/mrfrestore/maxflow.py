"""Exact s-t max-flow / min-cut on integer-capacity networks.

The solver grows two search trees, one from each terminal, and augments
along the paths where they meet, adopting orphaned nodes after each
augmentation instead of restarting the search. This is the dual-tree
augmenting-path scheme that suits vision grid graphs. Capacities are
64-bit integers, so flows are exact.

After the flow is maximal, the source side of the returned cut is exactly
the set of nodes reachable from the source in the residual graph. Every
other node, including a node with no terminal capacity, is on the sink side.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

SOURCE = -1
SINK = -2

_INF_DIST = 1 << 60


@dataclass(frozen=True)
class CutResult:
    flow_value: int
    side: np.ndarray  # True = source side

    def source_set(self):
        return np.flatnonzero(self.side)


class FlowNetwork:
    """Two-terminal network assembled node by node.

    Edges between non-terminal nodes carry a capacity in each direction;
    terminal capacities accumulate when ``add_terminal`` is called more than
    once on the same node.
    """

    def __init__(self, node_count: int = 0):
        self._n = 0
        self._src = []
        self._snk = []
        self._eu = []
        self._ev = []
        self._cuv = []
        self._cvu = []
        self._blocks = []
        if node_count:
            self.add_nodes(node_count)

    @property
    def node_count(self) -> int:
        return self._n

    def add_node(self) -> int:
        self._src.append(0)
        self._snk.append(0)
        self._n += 1
        return self._n - 1

    def add_nodes(self, count: int) -> range:
        start = self._n
        self._src.extend([0] * count)
        self._snk.extend([0] * count)
        self._n += count
        return range(start, self._n)

    def _check_node(self, u):
        if not 0 <= u < self._n:
            raise IndexError(f"node {u} does not exist")

    def add_edge(self, u: int, v: int, cap_uv: int, cap_vu: int = 0) -> None:
        if u == SOURCE or v == SINK or u == SINK or v == SOURCE:
            # route terminal arcs through the t-link accumulators
            if u == SOURCE and v >= 0:
                self.add_terminal(v, cap_uv, 0)
                return
            if v == SINK and u >= 0:
                self.add_terminal(u, 0, cap_uv)
                return
            raise ValueError("arcs may not leave the sink or enter the source")
        self._check_node(u)
        self._check_node(v)
        if cap_uv < 0 or cap_vu < 0:
            raise ValueError("capacities must be non-negative")
        self._eu.append(u)
        self._ev.append(v)
        self._cuv.append(int(cap_uv))
        self._cvu.append(int(cap_vu))

    def add_terminal(self, u: int, cap_source: int, cap_sink: int) -> None:
        self._check_node(u)
        if cap_source < 0 or cap_sink < 0:
            raise ValueError("capacities must be non-negative")
        self._src[u] += int(cap_source)
        self._snk[u] += int(cap_sink)

    @classmethod
    def from_arrays(cls, node_count, cap_source, cap_sink, eu, ev, cap_uv, cap_vu):
        """Bulk constructor used by the move solvers (no per-edge Python work)."""
        net = cls()
        net._n = int(node_count)
        net._src = np.asarray(cap_source, dtype=np.int64).tolist()
        net._snk = np.asarray(cap_sink, dtype=np.int64).tolist()
        net._blocks.append(tuple(np.asarray(a, dtype=np.int64) for a in (eu, ev, cap_uv, cap_vu)))
        if min(net._src + net._snk, default=0) < 0 or any(b.min(initial=0) < 0 for b in net._blocks[0][2:]):
            raise ValueError("capacities must be non-negative")
        return net

    def terminal_capacity(self, u: int):
        return int(self._src[u]), int(self._snk[u])

    def arrays(self):
        """(cap_source, cap_sink, eu, ev, cap_uv, cap_vu) as int64 arrays."""
        src = np.asarray(self._src, dtype=np.int64)
        snk = np.asarray(self._snk, dtype=np.int64)
        parts = list(self._blocks)
        if self._eu:
            parts.append(tuple(np.asarray(a, dtype=np.int64)
                               for a in (self._eu, self._ev, self._cuv, self._cvu)))
        if parts:
            eu, ev, cuv, cvu = (np.concatenate([p[i] for p in parts]) for i in range(4))
        else:
            eu = ev = cuv = cvu = np.zeros(0, dtype=np.int64)
        return src, snk, eu, ev, cuv, cvu

    @property
    def edge_count(self) -> int:
        return len(self._eu) + sum(len(b[0]) for b in self._blocks)

    def cut_capacity(self, side) -> int:
        """Capacity of the cut induced by a source-side indicator."""
        side = np.asarray(side, dtype=bool)
        src, snk, eu, ev, cuv, cvu = self.arrays()
        total = int(src[~side].sum()) + int(snk[side].sum())
        total += int(cuv[side[eu] & ~side[ev]].sum()) + int(cvu[side[ev] & ~side[eu]].sum())
        return total

    def to_dimacs(self) -> str:
        """DIMACS max-flow text; node 1 is the source, node n+2 the sink."""
        src, snk, eu, ev, cuv, cvu = self.arrays()
        s, t = 1, self._n + 2
        lines = []
        for i in range(self._n):
            if src[i]:
                lines.append(f"a {s} {i + 2} {src[i]}")
            if snk[i]:
                lines.append(f"a {i + 2} {t} {snk[i]}")
        for u, v, a, b in zip(eu, ev, cuv, cvu):
            if a:
                lines.append(f"a {u + 2} {v + 2} {a}")
            if b:
                lines.append(f"a {v + 2} {u + 2} {b}")
        head = [f"p max {self._n + 2} {len(lines)}", f"n {s} s", f"n {t} t"]
        return "\n".join(head + lines) + "\n"


def min_cut(net: FlowNetwork) -> CutResult:
    src, snk, eu, ev, cuv, cvu = net.arrays()
    flow, side = solve_arrays(net.node_count, src, snk, eu, ev, cuv, cvu)
    return CutResult(int(flow), side)


def solve_arrays(n, src, snk, eu, ev, cuv, cvu):
    if n == 0:
        return 0, np.zeros(0, dtype=bool)
    return _bk_solve(np.int64(n), src, snk, eu, ev, cuv, cvu)


# -- compiled core ----------------------------------------------------------

@numba.njit(cache=True)
def _bk_solve(n, src, snk, eu, ev, cuv, cvu):
    m = eu.shape[0]
    head = np.empty(2 * m, np.int64)
    nxt = np.empty(2 * m, np.int64)
    rcap = np.empty(2 * m, np.int64)
    first = np.full(n, -1, np.int64)
    for e in range(m):
        u = eu[e]
        v = ev[e]
        a = 2 * e
        head[a] = v
        rcap[a] = cuv[e]
        nxt[a] = first[u]
        first[u] = a
        b = a + 1
        head[b] = u
        rcap[b] = cvu[e]
        nxt[b] = first[v]
        first[v] = b

    trcap = np.empty(n, np.int64)
    flow = np.int64(0)
    for i in range(n):
        s = src[i]
        t = snk[i]
        if s < t:
            flow += s
        else:
            flow += t
        trcap[i] = s - t

    parent = np.full(n, -1, np.int64)
    is_sink = np.zeros(n, np.bool_)
    ts = np.zeros(n, np.int64)
    dist = np.zeros(n, np.int64)

    # FIFO of active nodes (each node queued at most once)
    qcap = n + 1
    queue = np.empty(qcap, np.int64)
    in_queue = np.zeros(n, np.bool_)
    qhead = 0
    qtail = 0
    # double-ended orphan list
    ocap = n + 1
    orphans = np.empty(ocap, np.int64)
    ohead = 0
    otail = 0

    for i in range(n):
        if trcap[i] > 0:
            parent[i] = -2
            is_sink[i] = False
            dist[i] = 1
        elif trcap[i] < 0:
            parent[i] = -2
            is_sink[i] = True
            dist[i] = 1
        else:
            continue
        queue[qtail] = i
        qtail = (qtail + 1) % qcap
        in_queue[i] = True

    time = np.int64(0)
    cur = np.int64(-1)
    while True:
        i = np.int64(-1)
        if cur >= 0 and parent[cur] != -1:
            i = cur
        else:
            while qhead != qtail:
                j = queue[qhead]
                qhead = (qhead + 1) % qcap
                in_queue[j] = False
                if parent[j] != -1:
                    i = j
                    break
            if i < 0:
                break

        # grow the tree containing i until it touches the other tree
        found = np.int64(-1)
        if not is_sink[i]:
            a = first[i]
            while a >= 0:
                if rcap[a] > 0:
                    j = head[a]
                    if parent[j] == -1:
                        is_sink[j] = False
                        parent[j] = a ^ 1
                        ts[j] = ts[i]
                        dist[j] = dist[i] + 1
                        if not in_queue[j]:
                            queue[qtail] = j
                            qtail = (qtail + 1) % qcap
                            in_queue[j] = True
                    elif is_sink[j]:
                        found = a
                        break
                    elif ts[j] <= ts[i] and dist[j] > dist[i]:
                        parent[j] = a ^ 1
                        ts[j] = ts[i]
                        dist[j] = dist[i] + 1
                a = nxt[a]
        else:
            a = first[i]
            while a >= 0:
                if rcap[a ^ 1] > 0:
                    j = head[a]
                    if parent[j] == -1:
                        is_sink[j] = True
                        parent[j] = a ^ 1
                        ts[j] = ts[i]
                        dist[j] = dist[i] + 1
                        if not in_queue[j]:
                            queue[qtail] = j
                            qtail = (qtail + 1) % qcap
                            in_queue[j] = True
                    elif not is_sink[j]:
                        found = a ^ 1
                        break
                    elif ts[j] <= ts[i] and dist[j] > dist[i]:
                        parent[j] = a ^ 1
                        ts[j] = ts[i]
                        dist[j] = dist[i] + 1
                a = nxt[a]

        time += 1
        if found < 0:
            cur = -1
            continue
        cur = i

        # augment along source-tree path + found arc + sink-tree path
        mid = found
        bott = rcap[mid]
        j = head[mid ^ 1]
        while True:
            a = parent[j]
            if a == -2:
                break
            if rcap[a ^ 1] < bott:
                bott = rcap[a ^ 1]
            j = head[a]
        if trcap[j] < bott:
            bott = trcap[j]
        j = head[mid]
        while True:
            a = parent[j]
            if a == -2:
                break
            if rcap[a] < bott:
                bott = rcap[a]
            j = head[a]
        if -trcap[j] < bott:
            bott = -trcap[j]

        rcap[mid ^ 1] += bott
        rcap[mid] -= bott
        j = head[mid ^ 1]
        while True:
            a = parent[j]
            if a == -2:
                break
            rcap[a] += bott
            rcap[a ^ 1] -= bott
            if rcap[a ^ 1] == 0:
                parent[j] = -3
                ohead = (ohead - 1 + ocap) % ocap
                orphans[ohead] = j
            j = head[a]
        trcap[j] -= bott
        if trcap[j] == 0:
            parent[j] = -3
            ohead = (ohead - 1 + ocap) % ocap
            orphans[ohead] = j
        j = head[mid]
        while True:
            a = parent[j]
            if a == -2:
                break
            rcap[a ^ 1] += bott
            rcap[a] -= bott
            if rcap[a] == 0:
                parent[j] = -3
                ohead = (ohead - 1 + ocap) % ocap
                orphans[ohead] = j
            j = head[a]
        trcap[j] += bott
        if trcap[j] == 0:
            parent[j] = -3
            ohead = (ohead - 1 + ocap) % ocap
            orphans[ohead] = j
        flow += bott

        # adoption
        while ohead != otail:
            o = orphans[ohead]
            ohead = (ohead + 1) % ocap
            sink_side = is_sink[o]
            dmin = _INF_DIST
            amin = np.int64(-1)
            a0 = first[o]
            while a0 >= 0:
                ok = rcap[a0] > 0 if sink_side else rcap[a0 ^ 1] > 0
                if ok:
                    j = head[a0]
                    if is_sink[j] == sink_side and parent[j] != -1:
                        d = np.int64(0)
                        while True:
                            if ts[j] == time:
                                d += dist[j]
                                break
                            a = parent[j]
                            d += 1
                            if a == -2:
                                ts[j] = time
                                dist[j] = 1
                                break
                            if a == -3:
                                d = _INF_DIST
                                break
                            j = head[a]
                        if d < _INF_DIST:
                            if d < dmin:
                                amin = a0
                                dmin = d
                            j = head[a0]
                            while ts[j] != time:
                                ts[j] = time
                                dist[j] = d
                                d -= 1
                                j = head[parent[j]]
                a0 = nxt[a0]

            if amin >= 0:
                parent[o] = amin
                ts[o] = time
                dist[o] = dmin + 1
            else:
                parent[o] = -1
                a0 = first[o]
                while a0 >= 0:
                    j = head[a0]
                    if is_sink[j] == sink_side and parent[j] != -1:
                        a = parent[j]
                        # j can regrow into o's old region; wake it up
                        if (rcap[a0] > 0 if sink_side else rcap[a0 ^ 1] > 0) and not in_queue[j]:
                            queue[qtail] = j
                            qtail = (qtail + 1) % qcap
                            in_queue[j] = True
                        if a != -2 and a != -3 and head[a] == o:
                            parent[j] = -3
                            orphans[otail] = j
                            otail = (otail + 1) % ocap
                    a0 = nxt[a0]

    side = np.zeros(n, np.bool_)
    for i in range(n):
        if parent[i] != -1 and not is_sink[i]:
            side[i] = True
    return flow, side
