"""Monte Carlo sampling of independent edge errors.

Randomness comes from numpy's Philox counter-based generator.  A batch is cut
into fixed-size chunks, and chunk ``k`` of seed ``s`` always uses the stream
``SeedSequence([s, k])``, so results do not depend on how chunks are spread
over workers.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .graph import DetectorGraph

CHUNK_SIZE = 4096


class CannotSampleError(ValueError):
    """The graph lacks priors on some edges."""


@dataclass
class Shot:
    error: np.ndarray
    detection_events: list
    true_observables: int


def _rng(seed: int, chunk: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, chunk])))


def _priors(graph: DetectorGraph) -> np.ndarray:
    if not graph.has_priors:
        raise CannotSampleError("every edge needs a prior to sample errors")
    return np.array([e.prior for e in graph.edges], dtype=float)


class SyndromeMap:
    """Vectorized ``e -> (H e, L e)`` for one graph, using edge endpoints."""

    def __init__(self, graph: DetectorGraph):
        self.graph = graph
        self.u, self.v = graph.incidence()
        self.obs = graph.observable_masks()

    def syndromes(self, errors: np.ndarray) -> np.ndarray:
        """Detector parities for a ``(shots, edges)`` error array."""
        shot, edge = np.nonzero(errors)
        s = np.zeros((errors.shape[0], self.graph.num_nodes), dtype=np.uint8)
        np.bitwise_xor.at(s, (shot, self.u[edge]), 1)
        vv = self.v[edge]
        keep = vv >= 0
        np.bitwise_xor.at(s, (shot[keep], vv[keep]), 1)
        return s

    def observables(self, errors: np.ndarray) -> np.ndarray:
        shot, edge = np.nonzero(errors)
        out = np.zeros(errors.shape[0], dtype=np.uint64)
        np.bitwise_xor.at(out, shot, self.obs[edge])
        return out


def syndrome_of(graph: DetectorGraph, error) -> list:
    """Sorted detection events produced by the error bit vector."""
    e = np.asarray(error, dtype=np.uint8).ravel()
    if e.shape[0] != len(graph.edges):
        raise ValueError(f"error has length {e.shape[0]}, graph has {len(graph.edges)} edges")
    s = np.zeros(graph.num_nodes, dtype=np.uint8)
    for i in np.flatnonzero(e):
        edge = graph.edges[i]
        s[edge.u] ^= 1
        if edge.v is not None:
            s[edge.v] ^= 1
    return [int(i) for i in np.flatnonzero(s)]


def observables_of(graph: DetectorGraph, error) -> int:
    mask = 0
    for i in np.flatnonzero(np.asarray(error)):
        mask ^= graph.edges[i].observables
    return mask


def sample_shot(graph: DetectorGraph, rng_seed: int) -> Shot:
    p = _priors(graph)
    e = (_rng(rng_seed).random(len(p)) < p).astype(np.uint8)
    return Shot(e, syndrome_of(graph, e), observables_of(graph, e))


def _error_blocks(graph: DetectorGraph, shots: int, seed: int, first_chunk: int = 0):
    """Yield ``(shots_in_block, edges)`` error arrays in shot order.

    Rows are drawn sequentially from each chunk's stream, so splitting a
    chunk into smaller blocks (to bound memory) does not change the values.
    """
    p = _priors(graph)
    rows_per_block = max(1, (1 << 22) // max(1, len(p)))
    remaining = shots
    chunk = first_chunk
    while remaining > 0:
        k = min(CHUNK_SIZE, remaining)
        gen = _rng(seed, chunk)
        done = 0
        while done < k:
            r = min(rows_per_block, k - done)
            yield (gen.random((r, len(p))) < p).astype(np.uint8)
            done += r
        remaining -= k
        chunk += 1


def sample_errors(graph: DetectorGraph, shots: int, seed: int, first_chunk: int = 0) -> np.ndarray:
    """``(shots, edges)`` error array built from consecutive chunks."""
    parts = list(_error_blocks(graph, shots, seed, first_chunk))
    if not parts:
        return np.zeros((0, len(graph.edges)), dtype=np.uint8)
    return np.concatenate(parts)


def sample_batch(graph: DetectorGraph, shots: int, seed: int, first_chunk: int = 0):
    """Sampled detection events and true masks for ``shots`` shots.

    Returns
    -------
    events : list of list of int
    truth : ndarray of uint64
    """
    smap = SyndromeMap(graph)
    events = []
    truths = []
    for errors in _error_blocks(graph, shots, seed, first_chunk):
        synd = smap.syndromes(errors)
        truths.append(smap.observables(errors))
        events.extend(np.flatnonzero(row).tolist() for row in synd)
    truth = np.concatenate(truths) if truths else np.zeros(0, dtype=np.uint64)
    return events, truth


# -- syndrome files --------------------------------------------------------------


def format_shots(events: Iterable, truth: Optional[Iterable] = None) -> str:
    lines = []
    truth = list(truth) if truth is not None else None
    for k, ev in enumerate(events):
        line = " ".join(str(int(d)) for d in ev)
        if truth is not None:
            line = (line + " " if line else "") + f"| {int(truth[k]):#x}"
        lines.append(line)
    return "\n".join(lines) + ("\n" if lines else "")


def parse_shots(text: str) -> list:
    """Parse shot lines into ``(events, truth_or_None)`` tuples."""
    out = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("#"):
            continue
        truth = None
        if "|" in line:
            line, t = line.split("|", 1)
            try:
                truth = int(t.strip(), 16)
            except ValueError:
                raise ValueError(f"line {line_no}: bad observable mask {t.strip()!r}") from None
        try:
            events = [int(tok) for tok in line.split()]
        except ValueError:
            raise ValueError(f"line {line_no}: bad detection event list") from None
        out.append((events, truth))
    return out
