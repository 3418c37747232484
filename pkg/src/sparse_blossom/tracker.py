"""Monotone event scheduling for look-at-node / look-at-region reminders.

Priorities are stored as 32-bit cyclic keys.  Because every pending event lies
at most one edge weight (< 2**24) after the current time, the absolute time of
a key is recovered from the last dequeued time.
"""
from __future__ import annotations

import heapq
from typing import Optional

KEY_BITS = 32
KEY_MASK = (1 << KEY_BITS) - 1
# Queued events must lie within this window of the current time.
MAX_WINDOW = 1 << 31


class MonotonicityError(RuntimeError):
    """A time earlier than the last dequeued time was pushed."""


class RadixHeap:
    """Monotone radix heap over 32-bit cyclic keys.

    Bucket ``k`` holds items whose key differs from the last extracted key
    first at bit ``k - 1`` (bucket 0 holds exact matches).  Extraction
    redistributes the lowest non-empty bucket, so each item moves at most
    ``KEY_BITS`` times.
    """

    __slots__ = ("buckets", "last", "size")

    def __init__(self, start_time: int = 0):
        self.buckets = [[] for _ in range(KEY_BITS + 1)]
        self.last = start_time
        self.size = 0

    def __len__(self) -> int:
        return self.size

    def push(self, time: int, item) -> None:
        if time < self.last or time - self.last >= MAX_WINDOW:
            raise MonotonicityError(f"time {time} outside window from {self.last}")
        key = time & KEY_MASK
        self.buckets[(key ^ self.last & KEY_MASK).bit_length()].append((key, item))
        self.size += 1

    def pop(self) -> Optional[tuple]:
        """Remove and return ``(absolute_time, item)`` with the least time."""
        if not self.size:
            return None
        buckets = self.buckets
        if not buckets[0]:
            i = 1
            while not buckets[i]:
                i += 1
            bucket = buckets[i]
            base = self.last & KEY_MASK
            # Cyclic distance from the last key decides the new minimum.
            best = min(bucket, key=lambda kv: (kv[0] - base) & KEY_MASK)[0]
            self.last += (best - base) & KEY_MASK
            buckets[i] = []
            for kv in bucket:
                buckets[(kv[0] ^ best).bit_length()].append(kv)
        self.size -= 1
        key, item = buckets[0].pop()
        return self.last, item


class BinaryHeap:
    """``heapq`` fallback with the same interface, used for differential tests."""

    __slots__ = ("heap", "last", "counter")

    def __init__(self, start_time: int = 0):
        self.heap = []
        self.last = start_time
        self.counter = 0

    def __len__(self) -> int:
        return len(self.heap)

    def push(self, time: int, item) -> None:
        if time < self.last:
            raise MonotonicityError(f"time {time} before {self.last}")
        self.counter += 1
        heapq.heappush(self.heap, (time, self.counter, item))

    def pop(self) -> Optional[tuple]:
        if not self.heap:
            return None
        time, _, item = heapq.heappop(self.heap)
        self.last = time
        return time, item


NODE = 0
REGION = 1


class Tracker:
    """Event queue that suppresses redundant reminders.

    Targets carry ``desired_time`` and ``queued_time`` attributes.  A reminder
    is only pushed when it is earlier than the one already queued; outdated
    reminders are discarded or re-pushed when they surface.
    """

    def __init__(self, queue: str = "radix", start_time: int = 0):
        if queue == "radix":
            self.queue = RadixHeap(start_time)
        elif queue == "binary":
            self.queue = BinaryHeap(start_time)
        else:
            raise ValueError(f"unknown queue kind {queue!r}")
        self.num_pushes = 0

    @property
    def now(self) -> int:
        return self.queue.last

    def schedule(self, kind: int, target, time: int) -> None:
        target.desired_time = time
        q = target.queued_time
        if q is None or q > time:
            target.queued_time = time
            self.queue.push(time, (kind, target))
            self.num_pushes += 1

    def cancel(self, target) -> None:
        target.desired_time = None

    def dequeue_next(self) -> Optional[tuple]:
        """Next live ``(kind, target, time)`` or ``None`` once the queue drains."""
        queue = self.queue
        while True:
            popped = queue.pop()
            if popped is None:
                return None
            time, (kind, target) = popped
            if target.queued_time != time:
                continue
            target.queued_time = None
            desired = target.desired_time
            if desired is None:
                continue
            if desired != time:
                target.queued_time = desired
                queue.push(desired, (kind, target))
                continue
            return kind, target, time

    def clear(self) -> None:
        while self.queue.pop() is not None:
            pass
