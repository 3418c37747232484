import random
import numpy as np
import pytest

from fuzzgen import random_matching_instance
from sparse_blossom.decoder import (DetectionEventError, Decoder, decode, decode_batch,
                                    decode_signed, verify_solution)
from sparse_blossom.flooder import CompressedEdge
from sparse_blossom.graph import DetectorGraph, Edge, gen_lattice_graph, gen_repetition_graph
from sparse_blossom.matcher import UnmatchableSyndromeError
from sparse_blossom.oracle import oracle_decode
from sparse_blossom.sampler import sample_batch


def test_empty_syndrome():
    sol = Decoder(gen_repetition_graph(3, 1, 0.1)).decode([])
    assert (sol.pairs, sol.total_weight, sol.predicted_observables) == ([], 0, 0)


def test_single_event_matches_observable_boundary():
    g = gen_repetition_graph(3, 1, 0.1)
    sol = Decoder(g).decode([0])
    ((a, b, e),) = sol.pairs
    assert (a, b) == (0, None)
    assert sol.predicted_observables == 0b1
    assert sol.total_weight == e.weight == 1 << 20


def test_event_out_of_range():
    with pytest.raises(DetectionEventError):
        Decoder(gen_repetition_graph(3, 1, 0.1)).decode([5])


def test_duplicate_events():
    with pytest.raises(DetectionEventError):
        Decoder(gen_repetition_graph(3, 1, 0.1)).decode([1, 1])


def test_unmatchable_single_event_without_boundary():
    g = DetectorGraph.from_edges([Edge(0, 1, 1.0)], num_nodes=2)
    with pytest.raises(UnmatchableSyndromeError):
        Decoder(g).decode([0])


def test_decoder_is_reusable():
    g = gen_lattice_graph(4, 3, 0.05)
    dec = Decoder(g, validate=True)
    events, _ = sample_batch(g, 40, seed=2)
    first = [dec.decode(ev) for ev in events]
    again = decode_batch(dec, events)
    for a, b in zip(first, again):
        assert (a.total_weight, a.predicted_observables) == (b.total_weight, b.predicted_observables)


def test_radix_and_binary_queues_agree():
    rng = random.Random(8)
    for _ in range(300):
        g, ev = random_matching_instance(rng)
        try:
            a = Decoder(g, queue="radix").decode(ev)
        except UnmatchableSyndromeError:
            continue
        b = Decoder(g, queue="binary").decode(ev)
        assert a.total_weight == b.total_weight


def test_verify_accepts_decoder_output():
    g = gen_lattice_graph(4, 4, 0.05)
    events, _ = sample_batch(g, 30, seed=4)
    dec = Decoder(g)
    for ev in events:
        assert verify_solution(g, ev, dec.decode(ev)).ok


def test_verify_detects_coverage_error():
    g = gen_repetition_graph(5, 1, 0.1)
    sol = Decoder(g).decode([0, 1])
    sol.pairs = sol.pairs + sol.pairs
    report = verify_solution(g, [0, 1], sol)
    assert not report and report.failure == "coverage"


def test_verify_detects_tampered_mask():
    g = gen_repetition_graph(3, 1, 0.1)
    sol = Decoder(g).decode([0])
    a, b, e = sol.pairs[0]
    sol.pairs = [(a, b, e._replace(obs=0))]
    sol.predicted_observables = 0
    report = verify_solution(g, [0], sol)
    assert report.failure == "mask mismatch"


def test_verify_detects_wrong_distance():
    g = gen_repetition_graph(5, 1, 0.1)
    sol = Decoder(g).decode([0, 1])
    a, b, e = sol.pairs[0]
    sol.pairs = [(a, b, e._replace(weight=e.weight + 2))]
    sol.total_weight += 2
    assert verify_solution(g, [0, 1], sol).failure == "distance"


def test_correction_reproduces_syndrome():
    g = gen_lattice_graph(3, 3, 0.1)
    h = g.check_matrix().astype(int)
    events, _ = sample_batch(g, 20, seed=6)
    dec = Decoder(g)
    for ev in events:
        sol = dec.decode(ev, want_correction=True)
        assert np.flatnonzero(h @ sol.correction % 2).tolist() == sorted(ev)


def test_signed_equals_plain_for_positive_weights():
    g = gen_repetition_graph(5, 2, 0.1)
    events, _ = sample_batch(g, 20, seed=1)
    for ev in events:
        a = decode(g, ev)
        b = decode_signed(g, ev)
        assert a.predicted_observables == b.predicted_observables
        assert b.total_weight_float == pytest.approx(a.total_weight_float)


def test_single_negative_half_edge_is_used():
    g = DetectorGraph.from_edges([Edge(0, None, -1.0, 1), Edge(0, 1, 2.0), Edge(1, None, 3.0)],
                                 num_nodes=2)
    sol = decode_signed(g, [0])
    assert sol.pairs == []
    assert sol.predicted_observables == 1 and sol.total_weight_float == -1.0
    assert sol.correction.tolist() == [1, 0, 0]


def test_pairs_hold_compressed_edges():
    rng = random.Random(2)
    checked = 0
    while checked < 20:
        g, ev = random_matching_instance(rng)
        ref = oracle_decode(g, ev)
        if ref is None or not ev:
            continue
        sol = Decoder(g).decode(ev)
        assert all(isinstance(e, CompressedEdge) for _, _, e in sol.pairs)
        assert sol.total_weight == ref.total_weight
        checked += 1
