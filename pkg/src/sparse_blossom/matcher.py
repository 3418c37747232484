"""Alternating trees, blossoms and matches.

The matcher reacts to the flooder's collisions and implosions by changing the
tree / blossom structure and telling the flooder which regions grow, freeze
or shrink.  At the end it shatters matched blossoms to recover matched pairs
of detection events.

Edge orientation conventions (``CompressedEdge.loc_from`` lies in the first
region named):

* ``AltTreeNode.inner_to_outer``: inner region -> outer region.
* ``AltTreeNode.parent_edge``: this node's inner region -> parent's outer.
* ``AltTreeNode.children``: ``(child, edge)`` with edge outer -> child's inner.
* ``region.match_edge``: region -> ``region.match_region`` (or boundary).
"""
from __future__ import annotations

from typing import Optional

from .flooder import CompressedEdge, Flooder, GraphFillRegion, InvariantViolation


class UnmatchableSyndromeError(ValueError):
    """No embedded matching exists (odd events in a boundaryless component)."""


class AltTreeNode:
    """One growing (outer) region and its shrinking (inner) region, if any."""

    __slots__ = ("inner", "outer", "inner_to_outer", "parent", "parent_edge", "children",
                 "visited")

    def __init__(self, outer: GraphFillRegion, inner=None, inner_to_outer=None):
        self.outer = outer
        self.inner = inner
        self.inner_to_outer = inner_to_outer
        self.parent: Optional[AltTreeNode] = None
        self.parent_edge: Optional[CompressedEdge] = None
        self.children = []
        self.visited = False

    def root(self) -> "AltTreeNode":
        n = self
        while n.parent is not None:
            n = n.parent
        return n

    def subtree(self) -> list:
        out = []
        stack = [self]
        while stack:
            n = stack.pop()
            out.append(n)
            stack.extend(c for c, _ in n.children)
        return out

    def remove_child(self, child: "AltTreeNode") -> CompressedEdge:
        for i, (c, e) in enumerate(self.children):
            if c is child:
                del self.children[i]
                return e
        raise InvariantViolation("child not found in alternating tree")


def _common_ancestor(a: AltTreeNode, b: AltTreeNode) -> Optional[AltTreeNode]:
    marked = []
    n = a
    while n is not None:
        n.visited = True
        marked.append(n)
        n = n.parent
    n = b
    while n is not None and not n.visited:
        n = n.parent
    for m in marked:
        m.visited = False
    return n


def odd_cycle_path(k: int, start: int, end: int) -> tuple:
    """Split a cycle of odd length ``k`` at children ``start`` and ``end``.

    Returns ``(path, forward, rest)``: the cycle indices from ``start`` to
    ``end`` along the direction holding an odd number of children, whether
    that direction follows increasing indices, and the remaining indices in
    increasing cyclic order (an even count, to be paired consecutively).
    """
    ahead = (end - start) % k
    if ahead % 2 == 0:
        path = [(start + j) % k for j in range(ahead + 1)]
        rest = [(end + 1 + j) % k for j in range(k - len(path))]
        return path, True, rest
    behind = (start - end) % k
    path = [(start - j) % k for j in range(behind + 1)]
    rest = [(start + 1 + j) % k for j in range(k - len(path))]
    return path, False, rest


class MatcherStats:
    """Optional size distributions gathered during decoding."""

    def __init__(self):
        self.blossom_cycle_lengths = []
        self.blossom_depths = []
        self.tree_sizes = []

    def merge(self, other: "MatcherStats") -> None:
        self.blossom_cycle_lengths.extend(other.blossom_cycle_lengths)
        self.blossom_depths.extend(other.blossom_depths)
        self.tree_sizes.extend(other.tree_sizes)


class Matcher:
    def __init__(self, flooder: Flooder):
        self.flooder = flooder
        flooder.matcher = self
        self.stats: Optional[MatcherStats] = None
        self.checker = None

    def reset(self) -> None:
        pass

    def add_detection_event(self, event: int) -> GraphFillRegion:
        region = self.flooder.create_region(event)
        region.alt = AltTreeNode(region)
        return region

    # -- helpers -----------------------------------------------------------

    def _match(self, a: GraphFillRegion, b: Optional[GraphFillRegion], edge: CompressedEdge) -> None:
        a.match_region = b
        a.match_edge = edge
        if b is not None:
            b.match_region = a
            b.match_edge = edge.reversed()
        if self.checker is not None:
            self.checker.check_tight(self.flooder, edge)

    def _dissolve_tree(self, node: AltTreeNode) -> None:
        """Turn the whole tree containing ``node`` into matches.

        ``node.outer`` must already be matched outside the tree.  Regions on
        the path from ``node`` to the root pair up along tree edges; every
        other tree node pairs its inner and outer regions.
        """
        on_path = set()
        n = node
        while n is not None:
            on_path.add(id(n))
            n = n.parent
        root = node.root()
        flooder = self.flooder
        for t in root.subtree():
            if id(t) in on_path:
                if t.parent is not None:
                    self._match(t.inner, t.parent.outer, t.parent_edge)
            else:
                self._match(t.inner, t.outer, t.inner_to_outer)
            t.outer.alt = None
            flooder.set_region_growth(t.outer, 0)
            if t.inner is not None:
                t.inner.alt = None
                flooder.set_region_growth(t.inner, 0)

    def _tree_size(self, node: AltTreeNode) -> int:
        return sum(1 if t.inner is None else 2 for t in node.root().subtree())

    # -- events from the flooder -------------------------------------------

    def on_region_hit(self, a: GraphFillRegion, b: GraphFillRegion, edge: CompressedEdge) -> None:
        """Growing region ``a`` touched region ``b`` along ``edge`` (a -> b)."""
        if self.checker is not None:
            self.checker.check_tight(self.flooder, edge)
        na = a.alt
        if na is None or na.outer is not a:
            raise InvariantViolation(f"growing region {a} is not an outer tree region")
        nb = b.alt
        if nb is None:
            if b.match_edge is None:
                raise InvariantViolation(f"{b} is neither matched nor in a tree")
            if b.match_region is not None:
                self._hit_match(na, b, edge)
            else:
                self._steal_boundary_match(na, b, edge)
        else:
            if nb.outer is not b:
                raise InvariantViolation(f"{a} collided with inner region {b}")
            common = _common_ancestor(na, nb)
            if common is None:
                if self.stats is not None:
                    self.stats.tree_sizes.append(self._tree_size(na))
                    self.stats.tree_sizes.append(self._tree_size(nb))
                self._match(a, b, edge)
                self._dissolve_tree(na)
                self._dissolve_tree(nb)
            else:
                self._form_blossom(na, nb, edge, common)

    def on_boundary_hit(self, a: GraphFillRegion, edge: CompressedEdge) -> None:
        if self.checker is not None:
            self.checker.check_tight(self.flooder, edge)
        na = a.alt
        if na is None or na.outer is not a:
            raise InvariantViolation(f"growing region {a} is not an outer tree region")
        self._match(a, None, edge)
        self._dissolve_tree(na)

    def on_implode(self, region: GraphFillRegion) -> None:
        n = region.alt
        if n is None or n.inner is not region or n.parent is None:
            raise InvariantViolation(f"imploding region {region} is not an inner tree region")
        if region.cycle:
            self._shatter_inner_blossom(n)
        else:
            # Bridge parent and child with a derived edge through the empty region.
            e1 = n.parent_edge
            e2 = n.inner_to_outer
            edge = CompressedEdge(e2.loc_to, e1.loc_to, e1.obs ^ e2.obs,
                                  e1.weight + e2.weight, e1.weight_f + e2.weight_f)
            self._form_blossom(n, n.parent, edge, n.parent)

    # -- case handlers -------------------------------------------------------

    def _hit_match(self, na: AltTreeNode, b: GraphFillRegion, edge: CompressedEdge) -> None:
        c = b.match_region
        child = AltTreeNode(c, b, b.match_edge)
        child.parent = na
        child.parent_edge = edge.reversed()
        na.children.append((child, edge))
        b.match_region = b.match_edge = None
        c.match_region = c.match_edge = None
        b.alt = child
        c.alt = child
        self.flooder.set_region_growth(b, -1)
        self.flooder.set_region_growth(c, 1)

    def _steal_boundary_match(self, na: AltTreeNode, b: GraphFillRegion, edge: CompressedEdge) -> None:
        b.match_region = b.match_edge = None
        self._match(na.outer, b, edge)
        self._dissolve_tree(na)

    def _form_blossom(self, n1: AltTreeNode, n2: AltTreeNode, edge: CompressedEdge,
                      common: AltTreeNode) -> None:
        """Collision ``edge`` (n1.outer -> n2.outer) closes an odd cycle."""
        regions1, edges1, orphans1 = self._path_up(n1, common)
        regions2, edges2, orphans2 = self._path_up(n2, common)
        cycle = [common.outer] + regions2[::-1] + regions1
        cycle_edges = [e.reversed() for e in reversed(edges2)] + [edge.reversed()] + edges1
        if self.stats is not None:
            self.stats.blossom_cycle_lengths.append(len(cycle))
        for n in (n1, n2):
            x = n
            while x is not common and x.parent is not common:
                x = x.parent
            if x is not common:
                common.remove_child(x)
        for orphan, e in orphans1 + orphans2:
            orphan.parent = common
            common.children.append((orphan, e))
        blossom = self.flooder.create_blossom(cycle, cycle_edges)
        if self.stats is not None:
            self.stats.blossom_depths.append(blossom.depth)
        common.outer = blossom
        blossom.alt = common

    @staticmethod
    def _path_up(node: AltTreeNode, stop: AltTreeNode):
        """Regions, edges and orphans walking from ``node`` up to ``stop``."""
        regions = []
        edges = []
        orphans = []
        prev = None
        while node is not stop:
            regions.append(node.outer)
            regions.append(node.inner)
            edges.append(node.inner_to_outer.reversed())
            edges.append(node.parent_edge)
            orphans.extend((c, e) for c, e in node.children if c is not prev)
            prev = node
            node = node.parent
        return regions, edges, orphans

    def _child_containing(self, blossom: GraphFillRegion, event: int) -> int:
        r = self.flooder.event_region[event]
        while r.blossom_parent is not blossom:
            r = r.blossom_parent
            if r is None:
                raise InvariantViolation(f"event {event} not inside {blossom}")
        return blossom.cycle.index(r)

    def _shatter_inner_blossom(self, n: AltTreeNode) -> None:
        blossom = n.inner
        parent = n.parent
        cycle = blossom.cycle
        edges = blossom.cycle_edges
        k = len(cycle)
        ip = self._child_containing(blossom, n.parent_edge.loc_from)
        ic = self._child_containing(blossom, n.inner_to_outer.loc_from)
        idx, forward, rest = odd_cycle_path(k, ip, ic)
        path = [cycle[i] for i in idx]
        if forward:
            path_edges = [edges[i] for i in idx[:-1]]
        else:
            path_edges = [edges[(i - 1) % k].reversed() for i in idx[:-1]]

        flooder = self.flooder
        flooder.shatter(blossom)

        edge_to_blossom = parent.remove_child(n)
        attach = parent
        attach_edge_down = edge_to_blossom
        attach_edge_up = n.parent_edge
        for j in range(0, len(path) - 1, 2):
            inner, outer = path[j], path[j + 1]
            t = AltTreeNode(outer, inner, path_edges[j])
            t.parent = attach
            t.parent_edge = attach_edge_up
            attach.children.append((t, attach_edge_down))
            inner.alt = t
            outer.alt = t
            attach = t
            attach_edge_down = path_edges[j + 1]
            attach_edge_up = path_edges[j + 1].reversed()
        n.inner = path[-1]
        n.parent = attach
        n.parent_edge = attach_edge_up
        attach.children.append((n, attach_edge_down))
        path[-1].alt = n

        for j in range(0, len(rest), 2):
            a, b = rest[j], rest[j + 1]
            self._match(cycle[a], cycle[b], edges[a])

        for j, r in enumerate(path):
            flooder.set_region_growth(r, -1 if j % 2 == 0 else 1)
        # Newly frozen pairs can now be hit by growing neighbours.
        for j in rest:
            flooder.reschedule_region_nodes(cycle[j])

    # -- final extraction ---------------------------------------------------

    def extract_matches(self, events) -> list:
        """Shatter matched blossoms; return compressed edges between events."""
        flooder = self.flooder
        out = []
        done = set()
        for ev in events:
            top = flooder.event_region[ev]
            while top.blossom_parent is not None:
                top = top.blossom_parent
            if id(top) in done:
                continue
            if top.match_edge is None:
                raise UnmatchableSyndromeError(
                    f"detection event {ev} could not be matched (no boundary reachable)")
            done.add(id(top))
            partner = top.match_region
            if partner is not None:
                done.add(id(partner))
            work = [(top, partner, top.match_edge)]
            while work:
                a, b, e = work.pop()
                out.append(e)
                for region, loc in ((a, e.loc_from), (b, e.loc_to)):
                    if region is None:
                        continue
                    while region.cycle:
                        i = self._child_containing(region, loc)
                        k = len(region.cycle)
                        for j in range(1, k, 2):
                            x = (i + j) % k
                            y = (i + j + 1) % k
                            work.append((region.cycle[x], region.cycle[y], region.cycle_edges[x]))
                        region = region.cycle[i]
        return out
