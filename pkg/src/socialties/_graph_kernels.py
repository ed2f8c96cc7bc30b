"""Compiled kernels for the structural metrics.

Everything here works on a canonical CSR form of the simple graph: arcs
sorted by (source, destination), each undirected edge stored as two arcs,
``arc_edge[p]`` mapping arc ``p`` back to its undirected edge id.  Kernels
are serial and allocation-free in their hot loops, so results are exactly
reproducible run to run.
"""

from __future__ import annotations

import numpy as np
from numba import njit


def build_csr(n: int, edges) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """CSR arrays (indptr int64, indices int32, arc_edge int32) for ``edges``.

    ``edges`` is a sequence of (u, v) pairs with u != v, nodes in [0, n).
    Adjacency lists come out sorted, which the triangle kernel requires.
    """
    m = len(edges)
    if m == 0:
        return np.zeros(n + 1, np.int64), np.empty(0, np.int32), np.empty(0, np.int32)
    e = np.asarray(edges, dtype=np.int64).reshape(m, 2)
    src = np.concatenate([e[:, 0], e[:, 1]])
    dst = np.concatenate([e[:, 1], e[:, 0]])
    eid = np.concatenate([np.arange(m, dtype=np.int64)] * 2)
    order = np.lexsort((dst, src))
    src, dst, eid = src[order], dst[order], eid[order]
    indptr = np.zeros(n + 1, np.int64)
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, dst.astype(np.int32), eid.astype(np.int32)


@njit(cache=True)
def msbfs_distance_stats(indptr, indices, n):
    """Per-node (sum of distances to reachable nodes, reachable count).

    Bit-parallel BFS over waves of 64 sources; d(s,v) = d(v,s) lets each
    node accumulate its own distance sum from the popcount of newly arrived
    source bits, so one pass over all waves yields all-pairs totals.
    Reachable counts include the node itself.
    """
    total = np.zeros(n, np.int64)
    reach = np.zeros(n, np.int64)
    seen = np.zeros(n, np.uint64)
    front = np.zeros(n, np.uint64)
    nxt = np.zeros(n, np.uint64)
    cur_nodes = np.empty(n, np.int64)
    nxt_nodes = np.empty(n, np.int64)
    in_nxt = np.zeros(n, np.uint8)
    for base in range(0, n, 64):
        hi = min(base + 64, n)
        for v in range(n):
            seen[v] = np.uint64(0)
            front[v] = np.uint64(0)
        ncur = 0
        for s in range(base, hi):
            bit = np.uint64(1) << np.uint64(s - base)
            seen[s] = bit
            front[s] = bit
            cur_nodes[ncur] = s
            ncur += 1
            reach[s] += 1  # distance-0 self, adds 0 to total
        d = 0
        while ncur > 0:
            d += 1
            nn = 0
            for i in range(ncur):
                v = cur_nodes[i]
                fv = front[v]
                for p in range(indptr[v], indptr[v + 1]):
                    w = indices[p]
                    new = fv & ~seen[w]
                    if new != np.uint64(0):
                        if in_nxt[w] == 0:
                            in_nxt[w] = 1
                            nxt_nodes[nn] = w
                            nn += 1
                        nxt[w] |= new
            for i in range(ncur):
                front[cur_nodes[i]] = np.uint64(0)
            ncur = 0
            for i in range(nn):
                w = nxt_nodes[i]
                new = nxt[w] & ~seen[w]
                if new != np.uint64(0):
                    seen[w] |= new
                    front[w] = new
                    c = 0
                    mask = new
                    while mask != np.uint64(0):
                        mask &= mask - np.uint64(1)
                        c += 1
                    total[w] += c * d
                    reach[w] += c
                    cur_nodes[ncur] = w
                    ncur += 1
                nxt[w] = np.uint64(0)
                in_nxt[w] = 0
    return total, reach


@njit(cache=True)
def brandes_betweenness(indptr, indices, arc_edge, n, num_edges, sources):
    """Ordered-pair betweenness sums accumulated from the given sources.

    Standard single-source dependency accumulation; the predecessor relation
    is recovered by re-scanning arcs against BFS levels instead of storing
    predecessor lists.  Endpoints are not counted in node scores.  Caller
    rescales (unordered pairs, pivot extrapolation).
    """
    bc_node = np.zeros(n, np.float64)
    bc_edge = np.zeros(num_edges, np.float64)
    dist = np.empty(n, np.int32)
    sigma = np.empty(n, np.float64)
    delta = np.empty(n, np.float64)
    order = np.empty(n, np.int64)
    for si in range(len(sources)):
        s = sources[si]
        for v in range(n):
            dist[v] = -1
            sigma[v] = 0.0
            delta[v] = 0.0
        dist[s] = 0
        sigma[s] = 1.0
        order[0] = s
        head = 0
        tail = 1
        while head < tail:
            v = order[head]
            head += 1
            dv = dist[v]
            sv = sigma[v]
            for p in range(indptr[v], indptr[v + 1]):
                w = indices[p]
                if dist[w] < 0:
                    dist[w] = dv + 1
                    order[tail] = w
                    tail += 1
                if dist[w] == dv + 1:
                    sigma[w] += sv
        for i in range(tail - 1, 0, -1):
            w = order[i]
            coeff = (1.0 + delta[w]) / sigma[w]
            dw = dist[w]
            for p in range(indptr[w], indptr[w + 1]):
                v = indices[p]
                if dist[v] == dw - 1:
                    c = sigma[v] * coeff
                    delta[v] += c
                    bc_edge[arc_edge[p]] += c
        for i in range(1, tail):
            bc_node[order[i]] += delta[order[i]]
    return bc_node, bc_edge


@njit(cache=True)
def neighbor_edge_counts(indptr, indices, n):
    """e_i = number of undirected edges among the neighbors of i.

    Needs sorted adjacency; each qualifying edge {j,k} is found once from j
    and once from k by merge-intersecting N(i) with N(j), hence the halving.
    """
    out = np.zeros(n, np.int64)
    for i in range(n):
        a0 = indptr[i]
        a1 = indptr[i + 1]
        acc = 0
        for p in range(a0, a1):
            j = indices[p]
            x = a0
            y = indptr[j]
            y1 = indptr[j + 1]
            while x < a1 and y < y1:
                vx = indices[x]
                vy = indices[y]
                if vx == vy:
                    acc += 1
                    x += 1
                    y += 1
                elif vx < vy:
                    x += 1
                else:
                    y += 1
        out[i] = acc // 2
    return out


def warmup() -> None:
    """Compile every kernel on a 3-node path so later calls are pure run time."""
    indptr, indices, arc_edge = build_csr(3, [(0, 1), (1, 2)])
    msbfs_distance_stats(indptr, indices, 3)
    brandes_betweenness(indptr, indices, arc_edge, 3, 2, np.arange(3, dtype=np.int64))
    neighbor_edge_counts(indptr, indices, 3)
