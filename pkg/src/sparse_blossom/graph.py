"""Detector graphs: edges, weights, discretization and synthetic generators.

A detector graph has one node per detector and one edge per error mechanism.
Regular edges join two detectors; half-edges (``v is None``) join a detector
to the virtual boundary.  Every edge carries a 64-bit mask of the logical
observables it flips.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

MAX_OBSERVABLES = 64
DEFAULT_WEIGHT_CAP = 1 << 20
# Edge weights must fit in 24 bits.
MAX_WEIGHT_CAP = 1 << 23


class GraphError(ValueError):
    """Raised for malformed or inconsistent detector graphs."""


class InvalidPriorError(GraphError):
    pass


class DegenerateWeightsError(GraphError):
    pass


class UnsupportedObservableError(GraphError):
    pass


class GraphParseError(GraphError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def weight_from_probability(p: float) -> float:
    """Log-likelihood weight ``log((1 - p) / p)`` of an error mechanism."""
    if not 0.0 < p < 1.0:
        raise InvalidPriorError(f"prior must lie strictly between 0 and 1, got {p!r}")
    return math.log((1.0 - p) / p)


def _prior_weight(p: float) -> float:
    # Priors of exactly 0 or 1 are allowed on edges; they never/always occur.
    if p == 0.0:
        return math.inf
    if p == 1.0:
        return -math.inf
    return weight_from_probability(p)


@dataclass(frozen=True)
class Edge:
    """One error mechanism.  ``v is None`` marks a boundary half-edge."""

    u: int
    v: Optional[int]
    weight: float
    observables: int = 0
    prior: Optional[float] = None
    weight_int: Optional[int] = None

    @property
    def is_boundary(self) -> bool:
        return self.v is None

    def key(self) -> tuple:
        if self.v is None:
            return (self.u,)
        return (min(self.u, self.v), max(self.u, self.v))


@dataclass(frozen=True)
class DetectorGraph:
    """Immutable detector graph.

    Build one with :meth:`from_edges`, which resolves parallel edges and
    checks the structural invariants.
    """

    num_nodes: int
    edges: tuple
    num_observables: int = 0
    # Parallel edges discarded at construction (lower weight kept).
    parallel_dropped: int = 0
    weight_scale: Optional[float] = field(default=None, compare=False)

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[Edge],
        num_nodes: Optional[int] = None,
        num_observables: Optional[int] = None,
    ) -> "DetectorGraph":
        kept: dict = {}
        order: list = []
        dropped = 0
        max_node = -1
        max_obs = 0
        for e in edges:
            if e.u < 0 or (e.v is not None and e.v < 0):
                raise GraphError(f"negative node index in {e}")
            if e.v is not None and e.v == e.u:
                raise GraphError(f"self-loop on node {e.u}")
            if e.observables < 0 or e.observables >> MAX_OBSERVABLES:
                raise UnsupportedObservableError(
                    f"observable mask {e.observables:#x} exceeds {MAX_OBSERVABLES} bits")
            if e.prior is not None:
                if not 0.0 <= e.prior <= 1.0:
                    raise InvalidPriorError(f"prior {e.prior!r} outside [0, 1]")
            if math.isnan(e.weight):
                raise GraphError(f"NaN weight in {e}")
            max_node = max(max_node, e.u, -1 if e.v is None else e.v)
            max_obs = max(max_obs, e.observables.bit_length())
            k = e.key()
            if k in kept:
                dropped += 1
                # Ties keep the first occurrence.
                if e.weight < kept[k].weight:
                    kept[k] = e
            else:
                kept[k] = e
                order.append(k)
        n = max_node + 1 if num_nodes is None else num_nodes
        if n <= max_node:
            raise GraphError(f"edge endpoint {max_node} >= num_nodes {n}")
        nobs = max_obs if num_observables is None else num_observables
        if nobs > MAX_OBSERVABLES:
            raise UnsupportedObservableError(f"{nobs} observables requested, at most 64 supported")
        if max_obs > nobs:
            raise GraphError(f"observable mask uses {max_obs} bits but num_observables={nobs}")
        g = cls(n, tuple(kept[k] for k in order), nobs, dropped)
        g.check()
        return g

    @property
    def boundary_present(self) -> bool:
        return any(e.v is None for e in self.edges)

    @property
    def is_discretized(self) -> bool:
        return all(e.weight_int is not None or not math.isfinite(e.weight) for e in self.edges)

    @property
    def has_priors(self) -> bool:
        return all(e.prior is not None for e in self.edges)

    def check(self) -> None:
        """Assert the structural invariants; raises :class:`GraphError`."""
        seen = set()
        for e in self.edges:
            if not 0 <= e.u < self.num_nodes:
                raise GraphError(f"endpoint {e.u} out of range")
            if e.v is not None and not 0 <= e.v < self.num_nodes:
                raise GraphError(f"endpoint {e.v} out of range")
            if e.observables >> self.num_observables:
                raise GraphError(f"observable mask {e.observables:#x} exceeds num_observables")
            if e.weight_int is not None and (e.weight_int < 0 or e.weight_int % 2):
                raise GraphError(f"discretized weight {e.weight_int} is not a non-negative even integer")
            if e.weight_int is not None and e.weight_int > MAX_WEIGHT_CAP:
                raise GraphError(f"discretized weight {e.weight_int} exceeds 24-bit budget")
            if e.key() in seen:
                raise GraphError(f"parallel edge {e.key()}")
            seen.add(e.key())

    def incidence(self) -> tuple:
        """Endpoint arrays ``(u, v)`` with ``v == -1`` for half-edges."""
        u = np.fromiter((e.u for e in self.edges), dtype=np.int64, count=len(self.edges))
        v = np.fromiter((-1 if e.v is None else e.v for e in self.edges), dtype=np.int64,
                        count=len(self.edges))
        return u, v

    def check_matrix(self) -> np.ndarray:
        """Dense detector check matrix ``H`` (nodes x edges) over GF(2)."""
        h = np.zeros((self.num_nodes, len(self.edges)), dtype=np.uint8)
        for i, e in enumerate(self.edges):
            h[e.u, i] ^= 1
            if e.v is not None:
                h[e.v, i] ^= 1
        return h

    def observable_masks(self) -> np.ndarray:
        return np.array([e.observables for e in self.edges], dtype=np.uint64)


def discretize_weights(graph: DetectorGraph, cap: int = DEFAULT_WEIGHT_CAP) -> DetectorGraph:
    """Scale ``|weight|`` so the largest finite magnitude maps to ``cap``.

    Each magnitude is rounded to the nearest even integer.  Signs are not
    represented here; use :func:`split_signs` for negative weights.
    Non-finite weights get ``weight_int=None`` (the edge is unusable).
    """
    if cap % 2 or not 2 <= cap <= MAX_WEIGHT_CAP:
        raise GraphError(f"cap must be even and in [2, 2**23], got {cap}")
    finite = [abs(e.weight) for e in graph.edges if math.isfinite(e.weight)]
    if not finite:
        return replace(graph, edges=tuple(replace(e, weight_int=None) for e in graph.edges),
                       weight_scale=None)
    top = max(finite)
    if top == 0.0:
        raise DegenerateWeightsError("all finite edge weights are zero")
    scale = cap / top
    new_edges = []
    for e in graph.edges:
        if math.isfinite(e.weight):
            # Divide first so subnormal maxima cannot overflow the scale.
            wi = 2 * math.floor(abs(e.weight) / top * (cap / 2) + 0.5)
            new_edges.append(replace(e, weight_int=wi))
        else:
            new_edges.append(replace(e, weight_int=None))
    g = replace(graph, edges=tuple(new_edges), weight_scale=scale)
    g.check()
    return g


@dataclass(frozen=True)
class SignSplit:
    """Negative-weight reduction: flip every edge whose weight is negative.

    Attributes
    ----------
    flip_set : ndarray of uint8
        1 for each edge with negative weight.
    adjusted_weights : ndarray of float
        Weight magnitudes.
    base_observable_mask : int
        XOR of the observables of the flipped edges.
    base_syndrome_flip : ndarray of uint8
        Detector parities flipped by the flipped edges.
    offset : float
        Sum of the (negative) weights of the flipped edges.
    """

    flip_set: np.ndarray
    adjusted_weights: np.ndarray
    base_observable_mask: int
    base_syndrome_flip: np.ndarray
    offset: float = 0.0

    def flipped_nodes(self) -> list:
        return [int(i) for i in np.flatnonzero(self.base_syndrome_flip)]


def split_signs(graph: DetectorGraph) -> SignSplit:
    w = np.array([e.weight for e in graph.edges], dtype=float)
    if not np.all(np.isfinite(w)):
        raise GraphError("split_signs needs finite weights")
    flip = (w < 0).astype(np.uint8)
    synd = np.zeros(graph.num_nodes, dtype=np.uint8)
    mask = 0
    offset = 0.0
    for i in np.flatnonzero(flip):
        e = graph.edges[i]
        synd[e.u] ^= 1
        if e.v is not None:
            synd[e.v] ^= 1
        mask ^= e.observables
        offset += e.weight
    return SignSplit(flip, np.abs(w), mask, synd, offset)


def adjusted_graph(graph: DetectorGraph) -> DetectorGraph:
    """Same graph with every weight replaced by its magnitude."""
    return replace(graph, edges=tuple(replace(e, weight=abs(e.weight), weight_int=None)
                                      for e in graph.edges), weight_scale=None)


def _parse_obs(tok: str, line_no: int) -> int:
    mask = 0
    for part in tok.split(","):
        if not part.startswith("L") or not part[1:].isdigit():
            raise GraphParseError(line_no, f"bad observable token {part!r}")
        k = int(part[1:])
        if k >= MAX_OBSERVABLES:
            raise UnsupportedObservableError(f"line {line_no}: observable L{k} >= 64 unsupported")
        mask |= 1 << k
    return mask


def parse_graph_file(text: str) -> DetectorGraph:
    """Parse the line-oriented graph format.

    Records::

        edge <u> <v> <weight> [L<k>[,L<k>...]] [p=<prior>]
        hedge <u> <weight> [L<k>...] [p=<prior>]
        nodes <n>            # optional, for trailing isolated detectors

    ``#`` starts a comment.
    """
    edges = []
    num_nodes = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        kind = toks[0]
        try:
            if kind == "nodes":
                if len(toks) != 2:
                    raise GraphParseError(line_no, "expected 'nodes <n>'")
                num_nodes = int(toks[1])
                continue
            if kind == "edge":
                if len(toks) < 4:
                    raise GraphParseError(line_no, "expected 'edge <u> <v> <weight> ...'")
                u, v, w = int(toks[1]), int(toks[2]), float(toks[3])
                rest = toks[4:]
            elif kind == "hedge":
                if len(toks) < 3:
                    raise GraphParseError(line_no, "expected 'hedge <u> <weight> ...'")
                u, v, w = int(toks[1]), None, float(toks[2])
                rest = toks[3:]
            else:
                raise GraphParseError(line_no, f"unknown record {kind!r}")
        except ValueError as ex:
            if isinstance(ex, GraphError):
                raise
            raise GraphParseError(line_no, str(ex)) from None
        obs = 0
        prior = None
        for tok in rest:
            if tok.startswith("p="):
                try:
                    prior = float(tok[2:])
                except ValueError:
                    raise GraphParseError(line_no, f"bad prior {tok!r}") from None
            elif tok.startswith("L"):
                obs ^= _parse_obs(tok, line_no)
            else:
                raise GraphParseError(line_no, f"unexpected token {tok!r}")
        if prior is not None:
            if not 0.0 <= prior <= 1.0:
                raise GraphParseError(line_no, f"prior {prior} outside [0, 1]")
            expected = _prior_weight(prior)
            if not (expected == w or math.isclose(expected, w, rel_tol=1e-9, abs_tol=1e-12)):
                raise GraphParseError(line_no, f"weight {w} inconsistent with prior {prior}")
        if u < 0 or (v is not None and v < 0):
            raise GraphParseError(line_no, "negative node index")
        edges.append(Edge(u, v, w, obs, prior))
    return DetectorGraph.from_edges(edges, num_nodes=num_nodes)


def _obs_token(mask: int) -> str:
    return ",".join(f"L{k}" for k in range(MAX_OBSERVABLES) if mask >> k & 1)


def format_graph_file(graph: DetectorGraph) -> str:
    lines = [f"# detector graph: {graph.num_nodes} nodes, {len(graph.edges)} edges, "
             f"{graph.num_observables} observables",
             f"nodes {graph.num_nodes}"]
    for e in graph.edges:
        parts = ["edge", str(e.u), str(e.v)] if e.v is not None else ["hedge", str(e.u)]
        parts.append(repr(e.weight))
        if e.observables:
            parts.append(_obs_token(e.observables))
        if e.prior is not None:
            parts.append(f"p={e.prior!r}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def _edge(u, v, p, obs=0) -> Edge:
    return Edge(u, v, _prior_weight(p), obs, p)


def gen_repetition_graph(distance: int, rounds: int, p: float) -> DetectorGraph:
    """Phenomenological repetition-code memory graph.

    ``distance - 1`` detectors per round form a chain whose ends are joined
    to the boundary.  Consecutive rounds are linked by time-like edges.  The
    single observable ``L0`` sits on the half-edges of the first data qubit.
    """
    if distance < 2 or rounds < 1:
        raise GraphError("need distance >= 2 and rounds >= 1")
    if not 0.0 < p < 0.5:
        raise InvalidPriorError(f"p must be in (0, 0.5), got {p}")
    w = distance - 1
    edges = []
    for t in range(rounds):
        base = t * w
        edges.append(_edge(base, None, p, 1))
        for j in range(1, distance - 1):
            edges.append(_edge(base + j - 1, base + j, p))
        edges.append(_edge(base + w - 1, None, p))
        if t + 1 < rounds:
            for i in range(w):
                edges.append(_edge(base + i, base + w + i, p))
    return DetectorGraph.from_edges(edges, num_nodes=w * rounds, num_observables=1)


def gen_lattice_graph(size: int, rounds: int, p: float) -> DetectorGraph:
    """Toric lattice of detectors stacked over ``rounds`` time slices.

    Horizontal edges crossing the column wrap carry ``L0``; vertical edges
    crossing the row wrap carry ``L1``.  Time-like edges join the same site in
    consecutive rounds.  There is no boundary.
    """
    if size < 2 or rounds < 1:
        raise GraphError("need size >= 2 and rounds >= 1")
    if not 0.0 < p < 1.0:
        raise InvalidPriorError(f"p must be in (0, 1), got {p}")
    L = size
    edges = []

    def idx(t, r, c):
        return t * L * L + r * L + c

    for t in range(rounds):
        for r in range(L):
            for c in range(L):
                a = idx(t, r, c)
                edges.append(_edge(a, idx(t, r, (c + 1) % L), p, 1 if c == L - 1 else 0))
                edges.append(_edge(a, idx(t, (r + 1) % L, c), p, 2 if r == L - 1 else 0))
                if t + 1 < rounds:
                    edges.append(_edge(a, idx(t + 1, r, c), p))
    return DetectorGraph.from_edges(edges, num_nodes=L * L * rounds, num_observables=2)


def graph_from_int_weights(
    num_nodes: int,
    edges: Sequence[tuple],
    num_observables: Optional[int] = None,
) -> DetectorGraph:
    """Build an already-discretized graph from ``(u, v, weight, obs)`` tuples.

    Weights must be even non-negative integers; ``v`` may be ``None``.
    """
    es = [Edge(u, v, float(w), obs, None, int(w)) for (u, v, w, obs) in edges]
    return DetectorGraph.from_edges(es, num_nodes=num_nodes, num_observables=num_observables)
