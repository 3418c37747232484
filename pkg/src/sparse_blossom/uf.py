"""Union-find decoder on compressed cluster trees.

Clusters grow by half-edges from every detection event.  Only detection
events are nodes of a cluster tree; each tree edge is a compressed edge
holding the observable mask of a path between two events.  Path compression
and union XOR masks along the replaced paths, and peeling runs directly on the
compressed tree, so no spanning tree of detector nodes is ever built.

Growth is unweighted: every edge needs two half-edge growth steps.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .graph import DetectorGraph
from .matcher import UnmatchableSyndromeError


class ClusterNode:
    """A detection event inside a compressed cluster tree.

    ``mask`` is the observable mask of the compressed edge to ``parent``.
    ``path`` is the matching set of detector-graph edges (as a bit set over
    edge indices) and is only maintained when edge tracking is on.
    """

    __slots__ = ("event", "parent", "mask", "path", "size", "count", "boundary", "odd_init",
                 "nodes", "children")

    def __init__(self, event: int):
        self.event = event
        self.parent: Optional[ClusterNode] = None
        self.mask = 0
        self.path = 0
        self.size = 1
        self.count = 1
        # (node, mask, path) of the one retained boundary edge, on roots only.
        self.boundary = None
        self.odd_init = False
        self.nodes = []
        self.children = []

    def __repr__(self):
        return f"ClusterNode({self.event})"


def uf_find(x: ClusterNode) -> ClusterNode:
    """Root of ``x``; compresses the path, XOR-ing masks into the new edges."""
    path = []
    while x.parent is not None:
        path.append(x)
        x = x.parent
    root = x
    mask = 0
    epath = 0
    for node in reversed(path):
        mask ^= node.mask
        epath ^= node.path
        node.mask = mask
        node.path = epath
        node.parent = root
    return root


def uf_union(x: ClusterNode, y: ClusterNode, mask: int, path: int = 0) -> ClusterNode:
    """Merge the clusters of ``x`` and ``y`` joined by a compressed edge x-y."""
    rx = uf_find(x)
    ry = uf_find(y)
    if rx is ry:
        return rx
    if rx.size < ry.size:
        x, y, rx, ry = y, x, ry, rx
    mx = x.mask if x is not rx else 0
    px = x.path if x is not rx else 0
    my = y.mask if y is not ry else 0
    py = y.path if y is not ry else 0
    ry.parent = rx
    ry.mask = mx ^ mask ^ my
    ry.path = px ^ path ^ py
    rx.size += ry.size
    rx.count += ry.count
    if rx.boundary is None:
        rx.boundary = ry.boundary
    ry.boundary = None
    rx.nodes.extend(ry.nodes)
    ry.nodes = []
    return rx


def compressed_peel(root: ClusterNode) -> tuple:
    """Peel a compressed cluster tree given as ``children`` lists.

    Each node's ``children`` holds ``(child, mask)`` pairs and ``odd_init``
    its initial parity.  Returns ``(root_parity_is_odd, mask)``, where
    ``mask`` XORs the masks of the highlighted edges.  Runs iteratively.
    """
    parity = {}
    acc = {}
    stack = [(root, False)]
    while stack:
        x, expanded = stack.pop()
        if not expanded:
            stack.append((x, True))
            for child, _ in x.children:
                stack.append((child, False))
            continue
        p = x.odd_init
        m = 0
        for child, cmask in x.children:
            m ^= acc.pop(id(child))
            if not parity.pop(id(child)):
                m ^= cmask
                p = not p
        parity[id(x)] = p
        acc[id(x)] = m
    return parity[id(root)], acc[id(root)]


def _peel_paths(root: ClusterNode) -> int:
    """Edge bit set of the highlighted edges (same rule as the mask)."""
    parity = {}
    acc = {}
    stack = [(root, False)]
    while stack:
        x, expanded = stack.pop()
        if not expanded:
            stack.append((x, True))
            for child, _ in x.children:
                stack.append((child, False))
            continue
        p = x.odd_init
        m = 0
        for child, _ in x.children:
            m ^= acc.pop(id(child))
            if not parity.pop(id(child)):
                m ^= child.path
                p = not p
        parity[id(x)] = p
        acc[id(x)] = m
    return acc[id(root)]


@dataclass
class UFResult:
    predicted_observables: int
    clusters: list
    correction_edges: Optional[int] = None


class UnionFindDecoder:
    """Reusable union-find decoder for one graph.

    Parameters
    ----------
    graph : DetectorGraph
    track_edges : bool
        Also carry explicit edge sets alongside masks so the correction can be
        expanded and checked.
    """

    def __init__(self, graph: DetectorGraph, track_edges: bool = False):
        self.graph = graph
        self.track_edges = track_edges
        self.adj = [[] for _ in range(graph.num_nodes)]
        self.edge_u = []
        self.edge_v = []
        self.edge_obs = []
        for i, e in enumerate(graph.edges):
            self.edge_u.append(e.u)
            self.edge_v.append(e.v)
            self.edge_obs.append(e.observables)
            if e.weight == float("inf"):
                continue
            self.adj[e.u].append((e.v, i))
            if e.v is not None:
                self.adj[e.v].append((e.u, i))

    def grow_and_merge(self, detection_events) -> tuple:
        """Grow clusters until each is even or touches the boundary.

        Returns the per-node source array, the cluster tree nodes and the
        per-edge growth counters.
        """
        n = self.graph.num_nodes
        track = self.track_edges
        src = [None] * n
        lmask = [0] * n
        lpath = [0] * n
        support = [0] * len(self.graph.edges)
        tree = {}
        for d in detection_events:
            d = int(d)
            if not 0 <= d < n:
                raise ValueError(f"detection event {d} out of range")
            if d in tree:
                raise ValueError(f"duplicate detection event {d}")
            c = ClusterNode(d)
            c.nodes.append(d)
            tree[d] = c
            src[d] = c
        adj = self.adj
        edge_obs = self.edge_obs
        while True:
            roots = {id(r): r for r in (uf_find(c) for c in tree.values())}
            active = [r for r in roots.values() if r.count % 2 == 1 and r.boundary is None]
            if not active:
                break
            grown = []
            progressed = False
            for r in active:
                for u in r.nodes:
                    for v, ei in adj[u]:
                        if support[ei] >= 2:
                            continue
                        if v is not None and src[v] is not None and uf_find(src[v]) is r:
                            continue
                        support[ei] += 1
                        progressed = True
                        if support[ei] == 2:
                            grown.append((u, v, ei))
            if not progressed:
                raise UnmatchableSyndromeError(
                    "an odd cluster cannot grow further and touches no boundary")
            for u, v, ei in grown:
                su = src[u]
                obs_e = edge_obs[ei]
                bit = (1 << ei) if track else 0
                if v is None:
                    r = uf_find(su)
                    if r.boundary is None:
                        r.boundary = (su, lmask[u] ^ obs_e, (lpath[u] ^ bit) if track else 0)
                    continue
                if src[v] is None:
                    r = uf_find(su)
                    src[v] = su
                    lmask[v] = lmask[u] ^ obs_e
                    if track:
                        lpath[v] = lpath[u] ^ bit
                    r.nodes.append(v)
                    continue
                sv = src[v]
                if uf_find(su) is uf_find(sv):
                    continue
                uf_union(su, sv, lmask[u] ^ lmask[v] ^ obs_e,
                         (lpath[u] ^ lpath[v] ^ bit) if track else 0)
        return src, tree, support

    def decode(self, detection_events) -> UFResult:
        _, tree, _ = self.grow_and_merge(detection_events)
        return self.peel(tree)

    def peel(self, tree: dict) -> UFResult:
        for c in tree.values():
            c.children = []
            c.odd_init = False
        # Peel the trees as they stand, without flattening them first.
        roots = []
        for c in tree.values():
            if c.parent is None:
                roots.append(c)
            else:
                c.parent.children.append((c, c.mask))
        mask = 0
        edges = 0
        clusters = []
        for r in roots:
            use_boundary = r.count % 2 == 1
            if use_boundary:
                if r.boundary is None:
                    raise UnmatchableSyndromeError("odd cluster without boundary")
                x, m, p = r.boundary
                mask ^= m
                edges ^= p
                x.odd_init = True
            odd, m = compressed_peel(r)
            if not odd:
                raise AssertionError("peeling left the root with even parity")
            mask ^= m
            if self.track_edges:
                edges ^= _peel_paths(r)
            clusters.append(r)
        return UFResult(mask, clusters, edges if self.track_edges else None)


def uf_decode(graph: DetectorGraph, detection_events) -> int:
    return UnionFindDecoder(graph).decode(detection_events).predicted_observables
