"""Region growth on the detector graph.

The flooder owns the per-node state and the graph fill regions.  It asks the
tracker for reminders, turns them into ARRIVE / LEAVE / COLLIDE / IMPLODE
events and forwards collisions and implosions to the matcher.

A region's radius is ``slope * t + intercept``.  A node caches its *wrapped*
radius (minus its radius of arrival plus the frozen radii of its non-top
owners), so its local radius is ``wrapped + top.radius(t)``.
"""
from __future__ import annotations

from typing import NamedTuple, Optional

from .tracker import NODE, REGION, Tracker


class InvariantViolation(AssertionError):
    """An internal invariant failed (only raised in validation mode)."""


class DuplicateDetectionEventError(ValueError):
    pass


class CompressedEdge(NamedTuple):
    """Endpoints and observable mask of a path between detection events.

    ``loc_to is None`` means the path ends on the boundary.  ``weight`` is the
    discretized path length, ``weight_f`` the same path in float units.
    """

    loc_from: int
    loc_to: Optional[int]
    obs: int
    weight: int = 0
    weight_f: float = 0.0

    def reversed(self) -> "CompressedEdge":
        return CompressedEdge(self.loc_to, self.loc_from, self.obs, self.weight, self.weight_f)


class DetectorNode:
    __slots__ = (
        "index", "nbrs", "nbr_w", "nbr_wf", "nbr_obs",
        "region", "top", "source", "obs", "r_arrival", "wrapped", "dist", "dist_f",
        "desired_time", "queued_time", "touched",
    )

    def __init__(self, index: int):
        self.index = index
        self.nbrs = []
        self.nbr_w = []
        self.nbr_wf = []
        self.nbr_obs = []
        self.touched = False
        self.reset()

    def reset(self) -> None:
        self.clear()
        self.desired_time = None
        self.queued_time = None

    def clear(self) -> None:
        """Make the node empty (tracker fields untouched)."""
        self.region = None
        self.top = None
        self.source = None
        self.obs = 0
        self.r_arrival = 0
        self.wrapped = 0
        self.dist = 0
        self.dist_f = 0.0

    def local_radius(self, t: int) -> int:
        if self.top is None:
            return 0
        return self.wrapped + self.top.slope * t + self.top.intercept

    def __repr__(self):
        return f"DetectorNode({self.index})"


class GraphFillRegion:
    """A region of the detector graph growing from a detection event or blossom."""

    __slots__ = (
        "uid", "slope", "intercept", "blossom_parent", "cycle", "cycle_edges", "shell",
        "match_region", "match_edge", "alt", "desired_time", "queued_time", "depth",
    )

    def __init__(self, uid: int, now: int):
        self.uid = uid
        self.slope = 1
        self.intercept = -now
        self.blossom_parent = None
        # cycle_edges[i] runs from cycle[i] to cycle[i + 1] (cyclically).
        self.cycle = []
        self.cycle_edges = []
        self.shell = []
        self.match_region = None
        self.match_edge = None
        self.alt = None
        self.desired_time = None
        self.queued_time = None
        self.depth = 0

    def radius(self, t: int) -> int:
        return self.slope * t + self.intercept

    @property
    def is_matched(self) -> bool:
        return self.match_edge is not None

    def owned_nodes(self) -> list:
        """Every node inside the region, including those of blossom descendants."""
        out = []
        stack = [self]
        while stack:
            r = stack.pop()
            out.extend(r.shell)
            stack.extend(r.cycle)
        return out

    def descendants(self) -> list:
        out = []
        stack = [self]
        while stack:
            r = stack.pop()
            out.append(r)
            stack.extend(r.cycle)
        return out

    def __repr__(self):
        kind = f"blossom{len(self.cycle)}" if self.cycle else "trivial"
        return f"Region#{self.uid}({kind}, y={self.slope}t+{self.intercept})"


class Flooder:
    """Geometry engine for one decoding instance.

    Parameters
    ----------
    nodes : list of DetectorNode
        Adjacency built by the decoder; reused across shots.
    tracker : Tracker
    validate : bool
        Check structural invariants after every event (slow).
    """

    def __init__(self, nodes, tracker: Tracker, validate: bool = False, checker=None):
        self.nodes = nodes
        self.tracker = tracker
        self.matcher = None
        self.validate = validate
        self.checker = checker
        self.touched = []
        self.regions = []
        self.event_region = {}
        self.trace = None
        self.last_time = 0
        self.num_events = 0

    @property
    def now(self) -> int:
        return self.tracker.now

    # -- node bookkeeping -------------------------------------------------

    def _touch(self, node: DetectorNode) -> None:
        if not node.touched:
            node.touched = True
            self.touched.append(node)

    def reset(self) -> None:
        for node in self.touched:
            node.reset()
            node.touched = False
        self.touched = []
        self.regions = []
        self.event_region = {}
        self.tracker.clear()
        self.tracker.queue.last = 0
        self.last_time = 0
        self.num_events = 0

    # -- region creation and growth ---------------------------------------

    def new_region(self) -> GraphFillRegion:
        r = GraphFillRegion(len(self.regions), self.now)
        self.regions.append(r)
        return r

    def create_region(self, event: int) -> GraphFillRegion:
        node = self.nodes[event]
        if node.region is not None:
            raise DuplicateDetectionEventError(f"detection event {event} given twice")
        region = self.new_region()
        self._touch(node)
        node.region = region
        node.top = region
        node.source = event
        node.obs = 0
        node.r_arrival = region.radius(self.now)
        node.wrapped = -node.r_arrival
        node.dist = 0
        node.dist_f = 0.0
        region.shell.append(node)
        self.event_region[event] = region
        self.reschedule_node(node)
        return region

    def set_region_growth(self, region: GraphFillRegion, slope: int) -> None:
        old = region.slope
        if old == slope:
            return
        now = self.now
        region.intercept = region.slope * now + region.intercept - slope * now
        region.slope = slope
        if old == -1:
            self.tracker.cancel(region)
        if slope == -1:
            self.reschedule_shrinking_region(region)
        if slope > old:
            for node in region.owned_nodes():
                self.reschedule_node(node)

    def create_blossom(self, cycle: list, cycle_edges: list) -> GraphFillRegion:
        """Freeze ``cycle`` (odd, >= 3 regions) into a new growing blossom."""
        if self.validate and (len(cycle) < 3 or len(cycle) % 2 == 0):
            raise InvariantViolation(f"blossom cycle of length {len(cycle)}")
        now = self.now
        blossom = self.new_region()
        blossom.cycle = list(cycle)
        blossom.cycle_edges = list(cycle_edges)
        blossom.depth = 1 + max(c.depth for c in cycle)
        stale = []
        for child in cycle:
            if child.slope == -1:
                self.tracker.cancel(child)
            if child.slope != 1:
                stale.append(child)
            rad = child.radius(now)
            child.slope = 0
            child.intercept = rad
            child.blossom_parent = blossom
            child.alt = None
            child.match_region = None
            child.match_edge = None
            for node in child.owned_nodes():
                node.wrapped += rad
                node.top = blossom
        # Nodes of children that were already growing keep valid schedules.
        for child in stale:
            for node in child.owned_nodes():
                self.reschedule_node(node)
        return blossom

    def shatter(self, blossom: GraphFillRegion) -> None:
        """Make the blossom's children active again (their slopes stay 0)."""
        for child in blossom.cycle:
            child.blossom_parent = None
            rad = child.intercept
            for node in child.owned_nodes():
                node.wrapped -= rad
                node.top = child
        if blossom.slope == -1:
            self.tracker.cancel(blossom)
        blossom.slope = 0
        blossom.intercept = 0
        blossom.alt = None
        blossom.cycle = []
        blossom.cycle_edges = []

    def reschedule_region_nodes(self, region: GraphFillRegion) -> None:
        for node in region.owned_nodes():
            self.reschedule_node(node)

    # -- event computation -------------------------------------------------

    def next_node_event(self, node: DetectorNode):
        """Earliest ``(time, neighbor_slot)`` of an ARRIVE/COLLIDE at ``node``."""
        top = node.top
        if top is None:
            s1 = 0
            c1 = 0
        else:
            s1 = top.slope
            if s1 < 0:
                return None
            c1 = node.wrapped + top.intercept
        best_t = None
        best_i = -1
        nbr_w = node.nbr_w
        for i, nb in enumerate(node.nbrs):
            if nb is None:
                if s1 != 1:
                    continue
                t = nbr_w[i] - c1
            else:
                ntop = nb.top
                if ntop is None:
                    if s1 != 1:
                        continue
                    t = nbr_w[i] - c1
                else:
                    if ntop is top:
                        continue
                    s = s1 + ntop.slope
                    if s <= 0:
                        continue
                    d = nbr_w[i] - c1 - nb.wrapped - ntop.intercept
                    if s == 2:
                        if d & 1:
                            raise InvariantViolation(f"odd collision gap {d} at node {node.index}")
                        t = d >> 1
                    else:
                        t = d
            if best_t is None or t < best_t:
                best_t = t
                best_i = i
        if best_t is None:
            return None
        return best_t, best_i

    def reschedule_node(self, node: DetectorNode) -> None:
        ev = self.next_node_event(node)
        if ev is None:
            node.desired_time = None
            return
        t = ev[0]
        if t < self.now:
            raise InvariantViolation(f"node {node.index} event at {t} before now={self.now}")
        self._touch(node)
        self.tracker.schedule(NODE, node, t)

    def next_region_event(self, region: GraphFillRegion):
        """``(time, node_or_None)``: LEAVE of the top shell node or IMPLODE."""
        shell = region.shell
        if not shell or (not region.cycle and len(shell) == 1):
            return region.intercept, None
        node = shell[-1]
        return node.wrapped + region.intercept, node

    def reschedule_shrinking_region(self, region: GraphFillRegion) -> None:
        if region.slope != -1:
            raise InvariantViolation(f"{region} is not shrinking")
        t, _ = self.next_region_event(region)
        if t < self.now:
            raise InvariantViolation(f"{region} event at {t} before now={self.now}")
        self.tracker.schedule(REGION, region, t)

    # -- event processing --------------------------------------------------

    def run(self) -> None:
        tracker = self.tracker
        validate = self.validate
        while True:
            item = tracker.dequeue_next()
            if item is None:
                return
            kind, target, t = item
            if validate:
                if type(t) is not int:
                    raise InvariantViolation(f"non-integer event time {t!r}")
                if t < self.last_time:
                    raise InvariantViolation(f"time went backwards: {t} < {self.last_time}")
            self.last_time = t
            if kind == NODE:
                self.process_node(target, t)
            else:
                self.process_region(target, t)

    def process_node(self, node: DetectorNode, t: int) -> None:
        ev = self.next_node_event(node)
        if ev is None:
            node.desired_time = None
            return
        if ev[0] != t:
            self.tracker.schedule(NODE, node, ev[0])
            return
        self.num_events += 1
        i = ev[1]
        nb = node.nbrs[i]
        if nb is None:
            top = node.top
            edge = CompressedEdge(node.source, None, node.obs ^ node.nbr_obs[i],
                                  node.dist + node.nbr_w[i], node.dist_f + node.nbr_wf[i])
            if self.trace is not None:
                self.trace.append((t, "COLLIDE", top.uid, None))
            self.matcher.on_boundary_hit(top, edge)
        elif node.top is None:
            self._arrive(node, nb, node.nbr_w[i], node.nbr_wf[i], node.nbr_obs[i], t)
        elif nb.top is None:
            self._arrive(nb, node, node.nbr_w[i], node.nbr_wf[i], node.nbr_obs[i], t)
        else:
            a, b = node.top, nb.top
            edge = CompressedEdge(node.source, nb.source, node.obs ^ nb.obs ^ node.nbr_obs[i],
                                  node.dist + node.nbr_w[i] + nb.dist,
                                  node.dist_f + node.nbr_wf[i] + nb.dist_f)
            if self.trace is not None:
                self.trace.append((t, "COLLIDE", a.uid, b.uid))
            if a.slope != 1:
                a, b, edge = b, a, edge.reversed()
            if b.slope == -1:
                raise InvariantViolation(f"growing {a} collided with shrinking {b}")
            self.matcher.on_region_hit(a, b, edge)
        self.reschedule_node(node)
        if self.validate:
            self.checker.after_event(self)

    def _arrive(self, node: DetectorNode, frm: DetectorNode, w: int, wf: float, obs: int,
                t: int) -> None:
        region = frm.top
        self._touch(node)
        node.region = region
        node.top = region
        node.source = frm.source
        node.obs = frm.obs ^ obs
        node.dist = frm.dist + w
        node.dist_f = frm.dist_f + wf
        node.r_arrival = region.radius(t)
        node.wrapped = -node.r_arrival
        region.shell.append(node)
        if self.trace is not None:
            self.trace.append((t, "ARRIVE", region.uid, node.index))
        self.reschedule_node(node)

    def process_region(self, region: GraphFillRegion, t: int) -> None:
        if region.slope != -1 or region.blossom_parent is not None:
            region.desired_time = None
            return
        et, node = self.next_region_event(region)
        if et != t:
            self.tracker.schedule(REGION, region, et)
            return
        self.num_events += 1
        if node is None:
            if self.trace is not None:
                self.trace.append((t, "IMPLODE", region.uid, None))
            self.matcher.on_implode(region)
        else:
            region.shell.pop()
            if self.trace is not None:
                self.trace.append((t, "LEAVE", region.uid, node.index))
            node.clear()
            self.reschedule_node(node)
            self.reschedule_shrinking_region(region)
        if self.validate:
            self.checker.after_event(self)
