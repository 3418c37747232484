"""Exact reference decoder through the shortest-path reduction.

All-pairs shortest paths between detection events (and each event's nearest
boundary) define a complete path graph; a minimum-weight perfect matching of
that graph, with one virtual boundary partner per event, is an optimal
embedded matching.  The matching is found exhaustively, so this is only for
small instances.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from .graph import DetectorGraph

DEFAULT_EVENT_BOUND = 12
INF = float("inf")


class OracleTooLargeError(ValueError):
    pass


def int_adjacency(graph: DetectorGraph):
    """Adjacency lists ``(nbr, weight_int, obs)``; ``nbr is None`` for half-edges."""
    adj = [[] for _ in range(graph.num_nodes)]
    for e in graph.edges:
        if e.weight_int is None:
            continue
        adj[e.u].append((e.v, e.weight_int, e.observables))
        if e.v is not None:
            adj[e.v].append((e.u, e.weight_int, e.observables))
    return adj


@dataclass
class ShortestPaths:
    """Single-source distances plus the observable masks of all shortest paths.

    ``masks[v]`` is the set of masks realized by shortest paths to ``v``;
    ``boundary_masks`` likewise for the boundary.  Zero-weight edges are
    handled by iterating mask propagation to a fixed point.
    """

    source: int
    dist: list
    masks: list
    boundary_dist: float
    boundary_masks: frozenset


def dijkstra(graph: DetectorGraph, source: int, adj=None, with_masks: bool = True) -> ShortestPaths:
    if adj is None:
        adj = int_adjacency(graph)
    n = graph.num_nodes
    dist = [INF] * n
    dist[source] = 0
    heap = [(0, source)]
    bdist = INF
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, w, _ in adj[u]:
            nd = d + w
            if v is None:
                if nd < bdist:
                    bdist = nd
            elif nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    masks = [set() for _ in range(n)]
    bmasks = set()
    if with_masks:
        masks[source].add(0)
        order = sorted((dist[v], v) for v in range(n) if dist[v] < INF)
        # Relax along tight edges until nothing new appears (zero weights can
        # make the dependency order ambiguous).
        changed = True
        while changed:
            changed = False
            for _, u in order:
                mu = masks[u]
                if not mu:
                    continue
                for v, w, obs in adj[u]:
                    if v is None:
                        if dist[u] + w == bdist:
                            for m in mu:
                                if m ^ obs not in bmasks:
                                    bmasks.add(m ^ obs)
                    elif dist[u] + w == dist[v]:
                        mv = masks[v]
                        for m in list(mu):
                            if m ^ obs not in mv:
                                mv.add(m ^ obs)
                                changed = True
    return ShortestPaths(source, dist, masks, bdist, frozenset(bmasks))


@dataclass
class OracleResult:
    total_weight: int
    pairs: list
    predicted_observables: int
    optimal_masks: frozenset
    unique_mask: bool


def oracle_decode(graph: DetectorGraph, detection_events, max_events: int = DEFAULT_EVENT_BOUND
                  ) -> Optional[OracleResult]:
    """Minimum-weight embedded matching by exhaustive pairing.

    Returns ``None`` when no valid matching exists.  ``optimal_masks`` is the
    set of observable masks reached by *some* minimum-weight solution.
    """
    events = sorted(set(int(d) for d in detection_events))
    if len(events) != len(list(detection_events)):
        raise ValueError("duplicate detection events")
    q = len(events)
    if q > max_events:
        raise OracleTooLargeError(f"{q} detection events exceed the oracle bound {max_events}")
    if not graph.is_discretized:
        raise ValueError("oracle needs a discretized graph")
    adj = int_adjacency(graph)
    sps = [dijkstra(graph, d, adj) for d in events]
    pair_d = [[sps[i].dist[events[j]] for j in range(q)] for i in range(q)]
    bnd_d = [sp.boundary_dist for sp in sps]

    # Each event either pairs with another event or with its own virtual
    # boundary partner; the virtual partners pair among themselves for free.
    @lru_cache(maxsize=None)
    def best(mask: int):
        if mask == 0:
            return 0, frozenset([0])
        i = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << i)
        cands = []
        if bnd_d[i] < INF:
            w, ms = best(rest)
            if w < INF:
                cands.append((w + bnd_d[i], frozenset(m ^ b for m in ms for b in sps[i].boundary_masks)))
        j_mask = rest
        while j_mask:
            j = (j_mask & -j_mask).bit_length() - 1
            j_mask &= j_mask - 1
            if pair_d[i][j] < INF:
                w, ms = best(rest & ~(1 << j))
                if w < INF:
                    pm = sps[i].masks[events[j]]
                    cands.append((w + pair_d[i][j], frozenset(m ^ b for m in ms for b in pm)))
        if not cands:
            return INF, frozenset()
        wmin = min(c[0] for c in cands)
        masks = frozenset().union(*(c[1] for c in cands if c[0] == wmin))
        return wmin, masks

    full = (1 << q) - 1
    total, masks = best(full)
    if total == INF:
        return None

    # Reconstruct one optimal pairing.
    pairs = []
    mask = full
    pred = 0
    while mask:
        i = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << i)
        w_here = best(mask)[0]
        if bnd_d[i] < INF and best(rest)[0] + bnd_d[i] == w_here:
            pairs.append((events[i], None, bnd_d[i]))
            pred ^= min(sps[i].boundary_masks)
            mask = rest
            continue
        for j in range(q):
            if rest >> j & 1 and pair_d[i][j] < INF and best(rest & ~(1 << j))[0] + pair_d[i][j] == w_here:
                pairs.append((events[i], events[j], pair_d[i][j]))
                pred ^= min(sps[i].masks[events[j]])
                mask = rest & ~(1 << j)
                break
        else:  # pragma: no cover
            raise AssertionError("reconstruction failed")
    best.cache_clear()
    return OracleResult(int(total), pairs, pred, masks, len(masks) == 1)
