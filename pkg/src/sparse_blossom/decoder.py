"""Top-level decoding entry points.

>>> from sparse_blossom.graph import gen_repetition_graph
>>> g = gen_repetition_graph(5, 1, 0.1)
>>> Decoder(g).decode([0, 1]).total_weight
1048576
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .flooder import DetectorNode, Flooder, InvariantViolation
from .graph import DetectorGraph, GraphError, adjusted_graph, discretize_weights, split_signs
from .matcher import Matcher, MatcherStats, UnmatchableSyndromeError
from .oracle import dijkstra, int_adjacency
from .tracker import Tracker
from .validation import InvariantChecker

__all__ = [
    "MwemSolution", "Decoder", "decode", "decode_signed", "decode_batch", "verify_solution",
    "VerificationReport", "UnmatchableSyndromeError", "InvariantViolation", "expand_path",
]


class DetectionEventError(ValueError):
    pass


@dataclass
class MwemSolution:
    """Matched detection events and the implied logical prediction.

    Attributes
    ----------
    pairs : list of (int, int or None, CompressedEdge)
        ``None`` as the second entry means matched to the boundary.
    total_weight : int
        Sum of discretized path lengths.
    total_weight_float : float
        Same paths measured in the graph's float weights (for signed decoding,
        includes the constant offset of the flipped edges).
    predicted_observables : int
    correction : ndarray or None
        Edge bit vector, only filled in when requested.
    """

    pairs: list
    total_weight: int
    total_weight_float: float
    predicted_observables: int
    correction: Optional[np.ndarray] = None
    num_events: int = 0


def _prepare(graph: DetectorGraph, cap: Optional[int] = None) -> DetectorGraph:
    if any(e.weight < 0 for e in graph.edges):
        raise GraphError("graph has negative weights; use decode_signed")
    if graph.is_discretized and cap is None:
        return graph
    return discretize_weights(graph) if cap is None else discretize_weights(graph, cap)


class Decoder:
    """Reusable sparse blossom decoder bound to one graph.

    Parameters
    ----------
    graph : DetectorGraph
        Non-negative weights.  Discretized automatically when needed.
    queue : {"radix", "binary"}
        Priority queue implementation used by the tracker.
    validate : bool
        Check invariants after every event and tightness of every recorded
        edge.  Much slower; meant for fuzzing.
    collect_stats : bool
        Record blossom cycle lengths, blossom depths and tree sizes.
    """

    def __init__(self, graph: DetectorGraph, queue: str = "radix", validate: bool = False,
                 collect_stats: bool = False, cap: Optional[int] = None):
        self.graph = _prepare(graph, cap)
        g = self.graph
        nodes = [DetectorNode(i) for i in range(g.num_nodes)]
        for e in g.edges:
            if e.weight_int is None:
                continue
            wf = abs(e.weight)
            a = nodes[e.u]
            b = None if e.v is None else nodes[e.v]
            a.nbrs.append(b)
            a.nbr_w.append(e.weight_int)
            a.nbr_wf.append(wf)
            a.nbr_obs.append(e.observables)
            if b is not None:
                b.nbrs.append(a)
                b.nbr_w.append(e.weight_int)
                b.nbr_wf.append(wf)
                b.nbr_obs.append(e.observables)
        self.nodes = nodes
        self.validate = validate
        self.checker = InvariantChecker(g) if validate else None
        self.tracker = Tracker(queue)
        self.flooder = Flooder(nodes, self.tracker, validate, self.checker)
        self.matcher = Matcher(self.flooder)
        self.matcher.checker = self.checker
        self.stats = MatcherStats() if collect_stats else None
        self.matcher.stats = self.stats

    def _check_events(self, events) -> list:
        out = [int(d) for d in events]
        n = self.graph.num_nodes
        for d in out:
            if not 0 <= d < n:
                raise DetectionEventError(f"detection event {d} out of range [0, {n})")
        if len(set(out)) != len(out):
            raise DetectionEventError("duplicate detection events")
        return out

    def decode(self, detection_events: Iterable[int], want_correction: bool = False) -> MwemSolution:
        events = self._check_events(detection_events)
        fl = self.flooder
        fl.reset()
        for d in events:
            self.matcher.add_detection_event(d)
        fl.run()
        edges = self.matcher.extract_matches(events)
        pairs = []
        total = 0
        total_f = 0.0
        mask = 0
        covered = 0
        for e in edges:
            pairs.append((e.loc_from, e.loc_to, e))
            total += e.weight
            total_f += e.weight_f
            mask ^= e.obs
            covered += 1 if e.loc_to is None else 2
        if self.validate and covered != len(events):
            raise InvariantViolation(f"{covered} events covered, expected {len(events)}")
        sol = MwemSolution(pairs, total, total_f, mask, num_events=len(events))
        if want_correction:
            sol.correction = correction_from_pairs(self.graph, pairs)
        return sol

    def trace_decode(self, detection_events) -> tuple:
        """Decode and also return the list of processed flooder events."""
        self.flooder.trace = []
        try:
            sol = self.decode(detection_events)
            return sol, self.flooder.trace
        finally:
            self.flooder.trace = None


def decode(graph: DetectorGraph, detection_events, **kwargs) -> MwemSolution:
    return Decoder(graph, **kwargs).decode(detection_events)


def decode_batch(decoder: Decoder, shots: Sequence) -> list:
    return [decoder.decode(s) for s in shots]


class SignedDecoder:
    """Decoder for graphs whose float weights may be negative.

    Edges with negative weight are assumed to have occurred; the residual
    problem on the weight magnitudes is solved with sparse blossom.
    """

    def __init__(self, graph: DetectorGraph, cap: int = 1 << 23, **kwargs):
        self.original = graph
        self.split = split_signs(graph)
        self.decoder = Decoder(discretize_weights(adjusted_graph(graph), cap), **kwargs)

    def decode(self, detection_events, want_correction: bool = True) -> MwemSolution:
        s = np.zeros(self.original.num_nodes, dtype=np.uint8)
        for d in detection_events:
            s[int(d)] ^= 1
        s ^= self.split.base_syndrome_flip
        sol = self.decoder.decode(np.flatnonzero(s).tolist(), want_correction=want_correction)
        sol.predicted_observables ^= self.split.base_observable_mask
        sol.total_weight_float += self.split.offset
        if sol.correction is not None:
            sol.correction = sol.correction ^ self.split.flip_set
        return sol


def decode_signed(graph: DetectorGraph, detection_events, **kwargs) -> MwemSolution:
    return SignedDecoder(graph, **kwargs).decode(detection_events)


# -- path expansion and verification ------------------------------------------


def expand_path(graph: DetectorGraph, source: int, target: Optional[int], obs: int,
                adj=None, sp=None) -> Optional[list]:
    """Edge indices of a shortest ``source -> target`` path with mask ``obs``.

    ``target=None`` means the boundary.  Returns ``None`` if no shortest path
    carries that mask.
    """
    if adj is None:
        adj = _indexed_adjacency(graph)
    if sp is None:
        sp = dijkstra(graph, source, with_masks=False)
    dist = sp.dist
    goal_d = sp.boundary_dist if target is None else dist[target]
    if goal_d == math.inf:
        return None
    start = (source, 0)
    prev = {start: None}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        u, m = state
        for v, w, o, idx in adj[u]:
            if v is None:
                if target is None and dist[u] + w == goal_d and m ^ o == obs:
                    path = [idx]
                    while prev[state] is not None:
                        state, eidx = prev[state]
                        path.append(eidx)
                    return path[::-1]
                continue
            if dist[u] + w != dist[v] or dist[v] > goal_d:
                continue
            nxt = (v, m ^ o)
            if nxt in prev:
                continue
            prev[nxt] = (state, idx)
            if target is not None and v == target and m ^ o == obs:
                path = []
                s = nxt
                while prev[s] is not None:
                    s, eidx = prev[s]
                    path.append(eidx)
                return path[::-1]
            queue.append(nxt)
    if target == source and obs == 0:
        return []
    return None


def _indexed_adjacency(graph: DetectorGraph):
    adj = [[] for _ in range(graph.num_nodes)]
    for i, e in enumerate(graph.edges):
        if e.weight_int is None:
            continue
        adj[e.u].append((e.v, e.weight_int, e.observables, i))
        if e.v is not None:
            adj[e.v].append((e.u, e.weight_int, e.observables, i))
    return adj


def correction_from_pairs(graph: DetectorGraph, pairs) -> np.ndarray:
    adj = _indexed_adjacency(graph)
    c = np.zeros(len(graph.edges), dtype=np.uint8)
    for a, b, e in pairs:
        path = expand_path(graph, a, b, e.obs, adj)
        if path is None:
            raise InvariantViolation(f"no shortest path realizes {e}")
        for idx in path:
            c[idx] ^= 1
    return c


@dataclass
class VerificationReport:
    ok: bool
    failure: Optional[str] = None
    details: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def verify_solution(graph: DetectorGraph, detection_events, solution: MwemSolution
                    ) -> VerificationReport:
    """Independent consistency checks of a decoded solution.

    Checks coverage, that every pair's stored length equals the shortest-path
    distance, that its mask is realized by a shortest path, that expanding the
    paths reproduces the syndrome, and that the totals add up.
    """
    if not graph.is_discretized:
        graph = _prepare(graph)
    events = [int(d) for d in detection_events]
    want = set(events)
    seen = []
    for a, b, _ in solution.pairs:
        seen.append(a)
        if b is not None:
            seen.append(b)
    if len(seen) != len(set(seen)) or set(seen) != want or len(events) != len(want):
        return VerificationReport(False, "coverage")
    adj = int_adjacency(graph)
    iadj = _indexed_adjacency(graph)
    total = 0
    mask = 0
    syndrome = np.zeros(graph.num_nodes, dtype=np.uint8)
    for a, b, e in solution.pairs:
        if e.loc_from != a or e.loc_to != b:
            return VerificationReport(False, "endpoints", [(a, b, e)])
        sp = dijkstra(graph, a, adj)
        d = sp.boundary_dist if b is None else sp.dist[b]
        if d != e.weight:
            return VerificationReport(False, "distance", [(a, b, e.weight, d)])
        masks = sp.boundary_masks if b is None else sp.masks[b]
        if e.obs not in masks:
            return VerificationReport(False, "mask mismatch", [(a, b, e.obs, sorted(masks))])
        path = expand_path(graph, a, b, e.obs, iadj, sp)
        if path is None:
            return VerificationReport(False, "mask mismatch", [(a, b, e.obs)])
        for idx in path:
            ed = graph.edges[idx]
            syndrome[ed.u] ^= 1
            if ed.v is not None:
                syndrome[ed.v] ^= 1
        total += e.weight
        mask ^= e.obs
    expected = np.zeros(graph.num_nodes, dtype=np.uint8)
    expected[events] = 1
    if not np.array_equal(syndrome, expected):
        return VerificationReport(False, "syndrome")
    if total != solution.total_weight:
        return VerificationReport(False, "total weight", [(total, solution.total_weight)])
    if mask != solution.predicted_observables:
        return VerificationReport(False, "observables", [(mask, solution.predicted_observables)])
    return VerificationReport(True)
