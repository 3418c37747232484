"""Invariant checks run after every event when decoding in validation mode."""
from __future__ import annotations

from .flooder import CompressedEdge, Flooder, InvariantViolation
from .oracle import dijkstra, int_adjacency


class InvariantChecker:
    """Structural and geometric checks against the live decoder state.

    Shortest-path distances are computed on demand (and cached) so tightness
    of every recorded compressed edge can be checked exactly.
    """

    def __init__(self, graph):
        self.graph = graph
        self.adj = int_adjacency(graph)
        self._sp = {}
        self.num_checks = 0

    def shortest(self, source: int):
        sp = self._sp.get(source)
        if sp is None:
            sp = dijkstra(self.graph, source, self.adj)
            self._sp[source] = sp
        return sp

    def _chain(self, flooder: Flooder, event: int) -> list:
        r = flooder.event_region[event]
        out = []
        while r is not None:
            out.append(r)
            r = r.blossom_parent
        return out

    def check_tight(self, flooder: Flooder, edge: CompressedEdge) -> None:
        now = flooder.now
        sp = self.shortest(edge.loc_from)
        a = self._chain(flooder, edge.loc_from)
        if edge.loc_to is None:
            d = sp.boundary_dist
            masks = sp.boundary_masks
            span = sum(r.radius(now) for r in a)
        else:
            d = sp.dist[edge.loc_to]
            masks = sp.masks[edge.loc_to]
            b = self._chain(flooder, edge.loc_to)
            ids_a = {id(r) for r in a}
            ids_b = {id(r) for r in b}
            span = sum(r.radius(now) for r in a if id(r) not in ids_b)
            span += sum(r.radius(now) for r in b if id(r) not in ids_a)
        if d != span:
            raise InvariantViolation(f"edge {edge} not tight: distance {d}, region radii {span}")
        if edge.weight != d:
            raise InvariantViolation(f"edge {edge} traced length {edge.weight} != distance {d}")
        if edge.obs not in masks:
            raise InvariantViolation(f"edge {edge} mask not realized by any shortest path")

    def after_event(self, flooder: Flooder) -> None:
        self.num_checks += 1
        now = flooder.now
        live = [r for r in flooder.regions if _alive(r)]
        seen = set()
        for r in live:
            y = r.radius(now)
            if y < 0:
                raise InvariantViolation(f"{r} has negative radius {y}")
            if r.cycle:
                if len(r.cycle) < 3 or len(r.cycle) % 2 == 0:
                    raise InvariantViolation(f"{r} has an even or short cycle")
                for c in r.cycle:
                    if c.blossom_parent is not r:
                        raise InvariantViolation(f"cycle child {c} has the wrong parent")
                    if c.slope != 0:
                        raise InvariantViolation(f"blossom child {c} is not frozen")
            if r.blossom_parent is not None and (r.alt is not None or r.match_edge is not None):
                raise InvariantViolation(f"inactive {r} holds tree or match state")
            for node in r.shell:
                if id(node) in seen:
                    raise InvariantViolation(f"node {node.index} in two shells")
                seen.add(id(node))
                if node.region is not r:
                    raise InvariantViolation(f"node {node.index} shell owner mismatch")
                owners = []
                x = r
                while x is not None:
                    owners.append(x)
                    x = x.blossom_parent
                if node.top is not owners[-1]:
                    raise InvariantViolation(f"node {node.index} caches a stale top region")
                cached = node.wrapped + node.top.radius(now)
                direct = -node.r_arrival + sum(o.radius(now) for o in owners)
                if cached != direct:
                    raise InvariantViolation(
                        f"node {node.index} local radius {cached} != recomputed {direct}")
                if direct < 0:
                    raise InvariantViolation(f"node {node.index} has negative local radius")
        for node in flooder.touched:
            if node.region is not None and id(node) not in seen:
                raise InvariantViolation(f"occupied node {node.index} missing from its shell")
        self._check_trees(live)

    def _check_trees(self, live) -> None:
        for r in live:
            if r.blossom_parent is not None:
                continue
            n = r.alt
            if n is None:
                if r.slope != 0:
                    raise InvariantViolation(f"{r} outside any tree but not frozen")
                if r.match_edge is None:
                    raise InvariantViolation(f"{r} is neither in a tree nor matched")
                if r.match_region is not None and r.match_region.match_region is not r:
                    raise InvariantViolation(f"asymmetric match at {r}")
                continue
            if n.outer is r:
                if r.slope != 1:
                    raise InvariantViolation(f"outer region {r} not growing")
            elif n.inner is r:
                if r.slope != -1:
                    raise InvariantViolation(f"inner region {r} not shrinking")
            else:
                raise InvariantViolation(f"{r} has a foreign tree node")
            if (n.parent is None) != (n.inner is None):
                raise InvariantViolation("tree parity broken: root with inner or non-root without")
            for c, e in n.children:
                if c.parent is not n:
                    raise InvariantViolation("tree child with wrong parent")


def _alive(region) -> bool:
    # Regions discarded by shattering have empty shells and no links left.
    if region.blossom_parent is not None:
        return True
    return region.alt is not None or region.match_edge is not None or region.slope != 0 \
        or bool(region.shell)
