import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fuzzgen import random_matching_instance
from sparse_blossom.decoder import Decoder
from sparse_blossom.graph import graph_from_int_weights
from sparse_blossom.matcher import UnmatchableSyndromeError, odd_cycle_path
from sparse_blossom.oracle import oracle_decode
from test_flooder import start, step_until


def decode_and_compare(graph, events, **kwargs):
    dec = Decoder(graph, validate=True, collect_stats=True, **kwargs)
    sol = dec.decode(events)
    ref = oracle_decode(graph, events)
    assert ref is not None and sol.total_weight == ref.total_weight
    assert sol.predicted_observables in ref.optimal_masks
    return dec, sol


def test_two_single_region_trees_match():
    g = graph_from_int_weights(2, [(0, 1, 6, 1)], num_observables=1)
    dec, sol = decode_and_compare(g, [0, 1])
    r0, r1 = dec.flooder.regions
    assert r0.match_region is r1 and r1.match_region is r0
    assert r0.slope == r1.slope == 0 and r0.alt is None and r1.alt is None
    assert sol.predicted_observables == 1


def test_tree_hits_match_grows_three_region_tree():
    g = graph_from_int_weights(3, [(1, 2, 2, 0), (0, 1, 12, 0), (0, None, 100, 0)])
    dec, (r0, r1, r2) = start(g, [0, 1, 2])
    # Regions 1 and 2 match at t = 1; region 0 reaches region 1 at t = 11.
    step_until(dec, lambda tr: len(tr) >= 2)
    root = r0.alt
    assert root.parent is None and root.inner is None and root.outer is r0
    (child, _), = root.children
    assert child.inner is r1 and child.outer is r2
    assert (r0.slope, r1.slope, r2.slope) == (1, -1, 1)
    assert child.inner_to_outer.loc_from == 1 and child.inner_to_outer.loc_to == 2


def test_grandchildren_collision_forms_five_cycle():
    # Root 0 grabs matches (1,2) and (3,4) at t = 20; the outer regions 2 and 4
    # then touch at t = 22, closing the cycle 0-1-2-4-3 through the root.
    g = graph_from_int_weights(5, [(1, 2, 20, 0), (3, 4, 20, 0), (0, 1, 30, 0), (0, 3, 30, 0),
                                   (2, 4, 24, 0), (0, None, 200, 0)])
    dec, sol = decode_and_compare(g, [0, 1, 2, 3, 4])
    assert dec.stats.blossom_cycle_lengths == [5]


def test_root_and_grandchild_collision_forms_three_cycle():
    g = graph_from_int_weights(3, [(0, 1, 30, 0), (1, 2, 20, 0), (2, 0, 34, 0),
                                   (0, None, 200, 0)])
    dec, sol = decode_and_compare(g, [0, 1, 2])
    assert dec.stats.blossom_cycle_lengths == [3]


def test_trivial_implosion_builds_three_cycle_edge():
    a, b = 0b01, 0b10
    g = graph_from_int_weights(3, [(0, 1, 30, a), (1, 2, 20, b), (0, None, 200, 0)],
                               num_observables=2)
    dec = Decoder(g, validate=True)
    made = []
    original = dec.flooder.create_blossom

    def record(cycle, edges):
        made.append(list(edges))
        return original(cycle, edges)

    dec.flooder.create_blossom = record
    trace_sol, trace = dec.trace_decode([0, 1, 2])
    assert any(kind == "IMPLODE" for _, kind, _, _ in trace)
    (edges,) = made
    closing = [e for e in edges if {e.loc_from, e.loc_to} == {0, 2}]
    assert len(closing) == 1
    assert closing[0].obs == a ^ b and closing[0].weight == 50
    ref = oracle_decode(g, [0, 1, 2])
    assert trace_sol.total_weight == ref.total_weight


def test_blossom_matched_to_boundary_shatters_into_pairs():
    g = graph_from_int_weights(3, [(0, 1, 2, 0), (1, 2, 2, 0), (0, 2, 2, 0), (1, None, 4, 1)],
                               num_observables=1)
    dec, sol = decode_and_compare(g, [0, 1, 2])
    pairs = sorted((a, -1) if b is None else tuple(sorted((a, b))) for a, b, _ in sol.pairs)
    assert pairs == [(0, 2), (1, -1)]
    assert sol.total_weight == 6 and sol.predicted_observables == 1


def test_no_blossoms_returns_matches_directly():
    g = graph_from_int_weights(4, [(0, 1, 4, 0), (2, 3, 6, 1)], num_observables=1)
    dec, sol = decode_and_compare(g, [0, 1, 2, 3])
    assert sorted((a, b) for a, b, _ in sol.pairs) == [(0, 1), (2, 3)]
    assert dec.stats.blossom_cycle_lengths == []


def test_unmatchable_odd_component():
    g = graph_from_int_weights(3, [(0, 1, 2, 0), (1, 2, 2, 0)])
    with pytest.raises(UnmatchableSyndromeError):
        Decoder(g).decode([0, 1, 2])


# -- odd path through a blossom cycle ---------------------------------------------------


def test_odd_path_same_child():
    assert odd_cycle_path(3, 0, 0) == ([0], True, [1, 2])


def test_odd_path_forward():
    assert odd_cycle_path(5, 0, 2) == ([0, 1, 2], True, [3, 4])


def test_odd_path_backward():
    assert odd_cycle_path(5, 0, 3) == ([0, 4, 3], False, [1, 2])


@given(st.integers(1, 7).map(lambda x: 2 * x + 1), st.data())
def test_odd_path_partitions_cycle(k, data):
    start_i = data.draw(st.integers(0, k - 1))
    end_i = data.draw(st.integers(0, k - 1))
    path, forward, rest = odd_cycle_path(k, start_i, end_i)
    assert path[0] == start_i and path[-1] == end_i
    assert len(path) % 2 == 1 and len(rest) % 2 == 0
    assert sorted(path + rest) == list(range(k))
    step = 1 if forward else -1
    assert all((b - a) % k == step % k for a, b in zip(path, path[1:]))
    # The leftover children form consecutive cycle neighbours, pairwise.
    assert all((rest[j + 1] - rest[j]) % k == 1 for j in range(0, len(rest), 2))


# -- deeper structures on a seeded corpus -------------------------------------------------


def test_shatter_and_nesting_are_exercised():
    rng = random.Random(77)
    shatters = 0
    max_depth = 0
    cases = 0
    while cases < 1500:
        g, ev = random_matching_instance(rng, tied=rng.random() < 0.5)
        if oracle_decode(g, ev) is None:
            continue
        cases += 1
        dec = Decoder(g, validate=True, collect_stats=True)
        count = [0]
        original = dec.matcher._shatter_inner_blossom

        def counting(node, _orig=original, _count=count):
            _count[0] += 1
            return _orig(node)

        dec.matcher._shatter_inner_blossom = counting
        sol = dec.decode(ev)
        ref = oracle_decode(g, ev)
        assert sol.total_weight == ref.total_weight
        shatters += count[0]
        max_depth = max([max_depth] + dec.stats.blossom_depths)
    assert shatters > 0
    assert max_depth >= 2


def test_tree_sizes_are_odd():
    rng = random.Random(3)
    for _ in range(300):
        g, ev = random_matching_instance(rng)
        dec = Decoder(g, collect_stats=True)
        try:
            dec.decode(ev)
        except UnmatchableSyndromeError:
            continue
        assert all(s % 2 == 1 for s in dec.stats.tree_sizes)
        assert all(c % 2 == 1 and c >= 3 for c in dec.stats.blossom_cycle_lengths)
