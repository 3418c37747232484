import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sparse_blossom.tracker import (KEY_MASK, NODE, REGION, BinaryHeap, MonotonicityError,
                                    RadixHeap, Tracker)


class Target:
    def __init__(self, name):
        self.name = name
        self.desired_time = None
        self.queued_time = None

    def __repr__(self):
        return self.name


def drain(tracker):
    out = []
    while True:
        item = tracker.dequeue_next()
        if item is None:
            return out
        out.append(item)


@pytest.fixture(params=["radix", "binary"])
def tracker(request):
    return Tracker(request.param)


def test_earlier_reschedule_adds_entry(tracker):
    n = Target("n")
    tracker.schedule(NODE, n, 10)
    tracker.schedule(NODE, n, 7)
    assert tracker.num_pushes == 2
    assert n.queued_time == 7
    assert drain(tracker) == [(NODE, n, 7)]


def test_later_reschedule_is_suppressed(tracker):
    n = Target("n")
    tracker.schedule(NODE, n, 7)
    tracker.schedule(NODE, n, 10)
    assert tracker.num_pushes == 1
    assert n.queued_time == 7
    # The early reminder surfaces, notices the later desire and defers itself.
    assert drain(tracker) == [(NODE, n, 10)]


def test_event_at_now_comes_first(tracker):
    a, b = Target("a"), Target("b")
    tracker.schedule(NODE, b, 1)
    tracker.schedule(REGION, a, 0)
    assert [x[1] for x in drain(tracker)] == [a, b]


def test_equal_times_in_any_order(tracker):
    a, b, c = Target("a"), Target("b"), Target("c")
    tracker.schedule(NODE, b, 5)
    tracker.schedule(NODE, a, 3)
    tracker.schedule(NODE, c, 5)
    out = drain(tracker)
    assert [t for *_, t in out] == [3, 5, 5]
    assert out[0][1] is a and {out[1][1], out[2][1]} == {b, c}


def test_empty_queue(tracker):
    assert tracker.dequeue_next() is None


def test_cancel_drops_reminder(tracker):
    n = Target("n")
    tracker.schedule(NODE, n, 4)
    tracker.cancel(n)
    assert drain(tracker) == []


def test_schedule_in_the_past_raises(tracker):
    a = Target("a")
    tracker.schedule(NODE, a, 20)
    drain(tracker)
    with pytest.raises(MonotonicityError):
        tracker.schedule(NODE, Target("b"), 19)


def test_radix_wraparound():
    start = (1 << 32) - 5
    h = RadixHeap(start)
    h.push((1 << 32) + 1, "late")
    h.push((1 << 32) - 2, "early")
    assert ((1 << 32) + 1) & KEY_MASK == 1
    assert h.pop() == ((1 << 32) - 2, "early")
    assert h.pop() == ((1 << 32) + 1, "late")
    assert h.pop() is None


def test_radix_rejects_outside_window():
    h = RadixHeap(100)
    with pytest.raises(MonotonicityError):
        h.push(99, "x")
    with pytest.raises(MonotonicityError):
        h.push(100 + (1 << 31), "x")


@given(st.integers(0, 1 << 40), st.lists(st.tuples(st.booleans(), st.integers(0, 1 << 24)),
                                          min_size=1, max_size=200))
def test_radix_matches_binary_heap(start, ops):
    radix = RadixHeap(start)
    binary = BinaryHeap(start)
    for k, (is_pop, delta) in enumerate(ops):
        if is_pop:
            a = radix.pop()
            b = binary.pop()
            assert (a is None) == (b is None)
            if a is not None:
                assert a[0] == b[0]
        else:
            t = binary.last + delta
            radix.push(t, k)
            binary.push(t, k)
    times_a = []
    while (x := radix.pop()) is not None:
        times_a.append(x[0])
    times_b = []
    while (x := binary.pop()) is not None:
        times_b.append(x[0])
    assert times_a == times_b == sorted(times_a)


@pytest.mark.parametrize("kind", ["radix", "binary"])
def test_dequeue_returns_earliest_pending_desire(kind):
    rng = random.Random(5)
    for _ in range(200):
        tr = Tracker(kind, start_time=(1 << 32) - 50)
        targets = [Target(str(i)) for i in range(6)]
        pending = {}
        last = tr.now
        for _ in range(60):
            if rng.random() < 0.3:
                item = tr.dequeue_next()
                if not pending:
                    assert item is None
                    continue
                _, target, t = item
                assert t == min(pending.values()) == pending.pop(target.name)
                assert t >= last
                last = t
            else:
                target = targets[rng.randrange(6)]
                t = tr.now + rng.randrange(100)
                tr.schedule(NODE, target, t)
                pending[target.name] = t
