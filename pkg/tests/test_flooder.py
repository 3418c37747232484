import pytest

from sparse_blossom.decoder import Decoder
from sparse_blossom.flooder import CompressedEdge, DuplicateDetectionEventError, InvariantViolation
from sparse_blossom.graph import graph_from_int_weights
from sparse_blossom.tracker import NODE


def start(graph, events, validate=True):
    dec = Decoder(graph, validate=validate)
    dec.flooder.reset()
    dec.flooder.trace = []
    regions = [dec.matcher.add_detection_event(d) for d in events]
    return dec, regions


def step(dec):
    """Process one live tracker event; returns its time or None when drained."""
    item = dec.tracker.dequeue_next()
    if item is None:
        return None
    kind, target, t = item
    fl = dec.flooder
    fl.last_time = t
    if kind == NODE:
        fl.process_node(target, t)
    else:
        fl.process_region(target, t)
    return t


def step_until(dec, predicate):
    while not predicate(dec.flooder.trace):
        assert step(dec) is not None, "ran out of events"


def set_time(dec, t):
    dec.tracker.queue.last = t


def test_create_region_is_trivial_and_growing():
    g = graph_from_int_weights(3, [(0, 1, 10, 0)])
    dec, (r,) = start(g, [0])
    assert r.slope == 1 and r.radius(0) == 0 and r.radius(7) == 7
    assert r.shell == [dec.nodes[0]] and r.owned_nodes() == [dec.nodes[0]]
    node = dec.nodes[0]
    assert node.source == 0 and node.obs == 0 and node.top is r


def test_duplicate_detection_event():
    g = graph_from_int_weights(2, [(0, 1, 2, 0)])
    dec, _ = start(g, [0])
    with pytest.raises(DuplicateDetectionEventError):
        dec.matcher.add_detection_event(0)


@pytest.mark.parametrize("half", [1, 4, 7])
def test_two_events_collide_halfway(half):
    g = graph_from_int_weights(2, [(0, 1, 2 * half, 0)])
    sol, trace = Decoder(g, validate=True).trace_decode([0, 1])
    assert len(trace) == 1
    t, kind, a, b = trace[0]
    assert (t, kind, {a, b}) == (half, "COLLIDE", {0, 1})
    assert sol.total_weight == 2 * half


def test_arrive_after_remaining_gap():
    # Node 0 has local radius 2 when node 3 is reached at t = 2; the empty
    # neighbor 1 is 6 away, so it is reached 4 later.
    g = graph_from_int_weights(4, [(0, 1, 6, 0), (2, 3, 2, 0), (3, None, 100, 0),
                                   (1, None, 100, 0)])
    dec, _ = start(g, [0, 2])
    step_until(dec, lambda tr: any(k == "ARRIVE" and x == 3 for _, k, _, x in tr))
    assert dec.tracker.now == 2
    n0 = dec.nodes[0]
    assert n0.local_radius(2) == 2
    t, slot = dec.flooder.next_node_event(n0)
    assert t == dec.tracker.now + 4 and n0.nbrs[slot] is dec.nodes[1]


def test_boundary_collision_after_remaining_gap():
    # Events 2 and 4 collide at t = 3; node 0 then has local radius 3 and a
    # weight-8 half-edge, so it reaches the boundary 5 later.
    g = graph_from_int_weights(5, [(0, None, 8, 1), (2, 4, 6, 0), (0, 1, 100, 0)])
    dec, _ = start(g, [0, 2, 4])
    step_until(dec, lambda tr: len(tr) >= 1)
    t, kind, a, b = dec.flooder.trace[0]
    assert (t, kind, {a, b}) == (3, "COLLIDE", {1, 2})
    n0 = dec.nodes[0]
    assert n0.local_radius(3) == 3
    t, slot = dec.flooder.next_node_event(n0)
    assert t == 3 + 5 and n0.nbrs[slot] is None
    step_until(dec, lambda tr: len(tr) >= 2)
    assert dec.flooder.trace[1] == (8, "COLLIDE", 0, None)


def test_frozen_regions_schedule_nothing():
    g = graph_from_int_weights(3, [(0, 1, 4, 0), (1, 2, 10, 0)])
    dec = Decoder(g, validate=True)
    dec.decode([0, 1])
    for i in (0, 1):
        assert dec.flooder.next_node_event(dec.nodes[i]) is None


def test_region_growth_is_continuous():
    g = graph_from_int_weights(2, [(0, 1, 100, 0)])
    dec, (r,) = start(g, [0])
    set_time(dec, 5)
    dec.flooder.set_region_growth(r, 0)
    assert r.radius(5) == 5 and r.radius(50) == 5
    set_time(dec, 9)
    dec.flooder.set_region_growth(r, -1)
    assert (r.slope, r.intercept) == (-1, 14)


def test_trivial_region_implodes_at_zero_radius():
    g = graph_from_int_weights(2, [(0, 1, 100, 0)])
    dec, (r,) = start(g, [0])
    set_time(dec, 6)
    dec.flooder.set_region_growth(r, -1)
    assert dec.flooder.next_region_event(r) == (12, None)


def test_leave_when_local_radius_reaches_zero():
    g = graph_from_int_weights(3, [(0, 1, 4, 0), (1, 2, 100, 0)])
    dec, (r,) = start(g, [0])
    step_until(dec, lambda tr: len(tr) >= 1)
    n1 = dec.nodes[1]
    assert dec.flooder.trace[0] == (4, "ARRIVE", 0, 1)
    assert n1.r_arrival == 4 and n1.wrapped == -4
    set_time(dec, 10)
    dec.flooder.set_region_growth(r, -1)
    # Radius is 20 - t; the node's local radius -4 + 20 - t hits zero at t = 16.
    assert dec.flooder.next_region_event(r) == (16, n1)


def test_empty_shell_blossom_implodes_at_zero_radius():
    g = graph_from_int_weights(2, [(0, 1, 100, 0)])
    dec, (r,) = start(g, [0])
    r.shell = []
    set_time(dec, 3)
    dec.flooder.set_region_growth(r, -1)
    assert dec.flooder.next_region_event(r) == (6, None)


def test_refreezing_cancels_shrinking_events():
    g = graph_from_int_weights(3, [(0, 1, 4, 0), (1, 2, 100, 0)])
    dec, (r,) = start(g, [0])
    step_until(dec, lambda tr: len(tr) >= 1)
    set_time(dec, 10)
    fl = dec.flooder
    fl.set_region_growth(r, -1)
    fl.set_region_growth(r, 0)
    assert r.desired_time is None
    while step(dec) is not None:
        pass
    assert all(kind not in ("LEAVE", "IMPLODE") for _, kind, _, _ in fl.trace)
    assert r.radius(100) == 10


def test_shrinking_region_needs_negative_slope():
    g = graph_from_int_weights(2, [(0, 1, 100, 0)])
    dec, (r,) = start(g, [0])
    with pytest.raises(InvariantViolation):
        dec.flooder.reschedule_shrinking_region(r)


def test_arrival_composes_observables():
    g = graph_from_int_weights(10, [(7, 8, 2, 0b01), (8, 9, 2, 0b10), (9, None, 100, 0)],
                               num_observables=2)
    dec, _ = start(g, [7])
    step_until(dec, lambda tr: any(k == "ARRIVE" and x == 9 for _, k, _, x in tr))
    n9 = dec.nodes[9]
    assert n9.source == 7 and n9.obs == 0b11 and n9.dist == 4


def test_collision_edge_between_sources():
    g = graph_from_int_weights(10, [(3, 9, 4, 0b100)], num_observables=3)
    sol = Decoder(g, validate=True).decode([3, 9])
    assert [tuple(e[:3]) for _, _, e in sol.pairs] == [(3, 9, 0b100)]
    assert isinstance(sol.pairs[0][2], CompressedEdge)


def test_compressed_edge_reversal():
    e = CompressedEdge(1, 4, 0b11, 6, 3.0)
    assert e.reversed() == CompressedEdge(4, 1, 0b11, 6, 3.0)
    assert e.reversed().reversed() == e


def test_blossom_collisions_use_stored_sources():
    # A triangle of events forms a blossom; a fourth event far from it then
    # collides with the blossom through node 5, which is not an event.
    g = graph_from_int_weights(6, [(0, 1, 2, 0), (1, 2, 2, 0), (0, 2, 2, 0),
                                   (2, 5, 10, 1), (5, 4, 10, 0)], num_observables=1)
    dec = Decoder(g, validate=True)
    seen = []
    original = dec.matcher.on_region_hit

    def record(a, b, edge):
        seen.append((bool(a.cycle) or bool(b.cycle), edge))
        original(a, b, edge)

    dec.matcher.on_region_hit = record
    sol = dec.decode([0, 1, 2, 4])
    assert any(is_blossom for is_blossom, _ in seen)
    for _, edge in seen:
        assert edge.loc_from in (0, 1, 2, 4) and edge.loc_to in (0, 1, 2, 4)
    blossom_edges = [e for b, e in seen if b]
    assert any({e.loc_from, e.loc_to} == {2, 4} and e.obs == 1 for e in blossom_edges)
    assert sol.total_weight == 2 + 20
