"""Irredundant buffer and splitter insertion for a fixed depth assignment."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

from .core import (
    DepthAssignment,
    IllegalDepthAssignment,
    MappedNetwork,
    Network,
    NodeId,
    NodeKind,
    Signal,
    TechParams,
    driver,
)


def owns_tree(net: Network, n: NodeId, p: TechParams) -> bool:
    """True for nodes whose fanout edges need a buffer tree: gates and branched PIs."""
    kind = net.kind(n)
    return kind is NodeKind.GATE or (kind is NodeKind.PI and p.branch_pi)


def level0_capacity(net: Network, n: NodeId, p: TechParams) -> float:
    return p.s_i if net.is_pi(n) else p.s_g


def tree_profile(hist: Mapping[int, int], s_b: int) -> Tuple[int, int]:
    """Run the level-by-level irredundant count on a relative-depth histogram.

    Returns ``(buffers, root_edges)`` where ``root_edges`` is the number of
    edges that would have to leave the tree owner itself.  Levels between
    distinct fanout depths are skipped in bulk once the edge count has
    collapsed to one, so the cost is linear in the number of fanouts.
    """
    if not hist:
        return 0, 0
    levels = sorted(hist, reverse=True)
    if levels[-1] < 1:
        raise IllegalDepthAssignment(f"fanout at relative depth {levels[-1]} < 1")
    count = 0
    edges = hist[levels[0]]
    for i, top in enumerate(levels):
        below = levels[i + 1] if i + 1 < len(levels) else 0
        # buffer levels strictly between `below` and `top`
        level = top - 1
        while level > below and edges > 1:
            edges = -(-edges // s_b)
            count += edges
            level -= 1
        if level > below:
            count += level - below
        if below > 0:
            edges = -(-edges // s_b)
            count += edges
            edges += hist[below]
    return count, edges


def fanout_tree_size(
    net: Network, d: DepthAssignment, n: NodeId, p: TechParams
) -> int:
    """Number of irredundant buffers in the fanout tree of ``n``.

    Raises
    ------
    IllegalDepthAssignment
        If some fanout has relative depth below 1, or more edges than the
        owner's splitting capacity would have to leave ``n`` directly.
    """
    if not owns_tree(net, n, p):
        return 0
    base = d[n]
    hist = Counter(d[sink] - base for sink, _ in net.fanout_edges(n))
    try:
        count, edges = tree_profile(hist, p.s_b)
    except IllegalDepthAssignment as exc:
        raise IllegalDepthAssignment(f"node {n}: {exc}", n) from None
    if edges > level0_capacity(net, n, p):
        raise IllegalDepthAssignment(
            f"node {n} would drive {edges} edges directly (capacity "
            f"{level0_capacity(net, n, p)})",
            n,
        )
    return count


def count_buffers(net: Network, d: DepthAssignment, p: TechParams) -> int:
    """Total irredundant buffer count: the sum of all fanout tree sizes."""
    return sum(fanout_tree_size(net, d, n, p) for n in net.nodes() if owns_tree(net, n, p))


# -- construction --------------------------------------------------------------


@dataclass
class FanoutTree:
    """Materialized fanout tree of one node.

    ``levels[l]`` lists the buffers at relative depth ``l``; ``parent`` maps
    every buffer and every ``(sink, slot)`` edge to the node feeding it.
    """

    owner: NodeId
    levels: Dict[int, List[NodeId]] = field(default_factory=dict)
    parent: Dict[object, NodeId] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return sum(len(v) for v in self.levels.values())


def _plan_tree(
    hist_edges: Dict[int, List[Tuple[NodeId, int]]], s_b: int
) -> Tuple[Dict[int, int], Dict[object, Tuple[str, int, int]], int]:
    """Top-down plan: buffers per level, parent slot of every child, root edges.

    Children of a level are its buffers (in order) followed by its sinks by
    ``(sink, slot)``; each buffer below is filled to ``s_b`` before the next.
    """
    l_max = max(hist_edges)
    counts: Dict[int, int] = {}
    parent: Dict[object, Tuple[str, int, int]] = {}
    children: List[object] = sorted(hist_edges[l_max])
    for level in range(l_max - 1, 0, -1):
        nb = -(-len(children) // s_b)
        counts[level] = nb
        for k, child in enumerate(children):
            parent[child] = ("buf", level, k // s_b)
        children = [("buf", level, i) for i in range(nb)] + sorted(hist_edges.get(level, ()))
    return counts, parent, len(children)


def _materialize(
    source: Network, mapped: Network, d: DepthAssignment, n: NodeId, p: TechParams,
    depth_out: DepthAssignment,
) -> FanoutTree:
    base = d[n]
    by_level: Dict[int, List[Tuple[NodeId, int]]] = defaultdict(list)
    for sink, slot in source.fanout_edges(n):
        by_level[d[sink] - base].append((sink, slot))
    tree = FanoutTree(owner=n)
    if not by_level:
        return tree
    counts, parent, root_edges = _plan_tree(by_level, p.s_b)
    if root_edges > level0_capacity(source, n, p):
        raise IllegalDepthAssignment(f"node {n} would drive {root_edges} edges directly", n)
    ids: Dict[Tuple[str, int, int], NodeId] = {}
    for level in sorted(counts):
        tree.levels[level] = []
        for i in range(counts[level]):
            key = ("buf", level, i)
            src = n if level == 1 else ids[parent[key]]
            b = mapped.add_buffer(Signal(src))
            ids[key] = b
            depth_out[b] = base + level
            tree.levels[level].append(b)
            tree.parent[b] = src
    for edges in by_level.values():
        for edge in edges:
            slot_parent = parent.get(edge)
            src = n if slot_parent is None else ids[slot_parent]
            tree.parent[edge] = src
            if src != n:
                sink, slot = edge
                old = mapped.fanins(sink)[slot]
                mapped.set_fanin(sink, slot, Signal(src, old.complemented))
    return tree


def build_fanout_trees(
    net: Network, d: DepthAssignment, p: TechParams
) -> Tuple[MappedNetwork, Dict[NodeId, FanoutTree]]:
    """Like :func:`insert_buffers`, also returning the tree of every source."""
    from .schedule import is_legal

    verdict = is_legal(net, d, p)
    if not verdict:
        raise IllegalDepthAssignment(verdict.reason, verdict.node)
    mapped = net.copy()
    depth: DepthAssignment = {n: d[n] for n in net.nodes() if not net.is_const(n)}
    trees = {}
    for n in list(net.nodes()):
        if owns_tree(net, n, p):
            trees[n] = _materialize(net, mapped, d, n, p, depth)
    return MappedNetwork(mapped, depth), trees


def insert_buffers(net: Network, d: DepthAssignment, p: TechParams) -> MappedNetwork:
    """Build the mapped network for ``(net, d)`` with one irredundant tree per source.

    Node ids of ``net`` are preserved in the result; buffers get fresh ids.
    Edges from constants, and from PIs when ``p.branch_pi`` is false, are
    left unbuffered.

    Raises
    ------
    IllegalDepthAssignment
        If ``d`` is not legal for ``net`` under ``p``.
    """
    return build_fanout_trees(net, d, p)[0]


# -- verification ------------------------------------------------------------------


@dataclass
class VerifyReport:
    path_balanced: bool = True
    properly_branched: bool = True
    irredundant: bool = True
    offenders: List[Tuple[NodeId, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.path_balanced and self.properly_branched and self.irredundant

    def __bool__(self) -> bool:
        return self.ok

    def as_dict(self, names: Optional[Mapping[NodeId, str]] = None) -> dict:
        label = (lambda n: names.get(n, n)) if names else (lambda n: n)
        return {
            "path_balanced": self.path_balanced,
            "properly_branched": self.properly_branched,
            "irredundant": self.irredundant,
            "offenders": [[label(n), what] for n, what in self.offenders],
        }


def _free_source(net: Network, n: NodeId, p: TechParams) -> bool:
    """Sources whose edges carry no balancing or branching obligation."""
    return net.is_const(n) or (net.is_pi(n) and not p.branch_pi)


def verify_mapped(m: MappedNetwork, p: TechParams) -> VerifyReport:
    """Check path balance, proper branching and irredundance of a mapped network."""
    net, d = m.net, m.depth
    rep = VerifyReport()

    def flag(attr: str, node: NodeId, what: str) -> None:
        setattr(rep, attr, False)
        rep.offenders.append((node, what))

    for n in net.nodes():
        if net.is_const(n):
            continue
        if n not in d or d[n] < 0:
            flag("path_balanced", n, "missing or negative depth")
    if not rep.path_balanced:
        return rep

    for n in net.nodes():
        kind = net.kind(n)
        if kind is NodeKind.BUFFER and len(net.fanins(n)) != 1:
            flag("properly_branched", n, "buffer in-degree is not 1")
        for s in net.fanins(n):
            u = s.node
            if net.is_const(u):
                continue
            if _free_source(net, u, p):
                if d[n] < d[u] + 1:
                    flag("path_balanced", n, f"edge from {u} does not go upward")
            elif d[n] != d[u] + 1:
                flag("path_balanced", n, f"edge from {u} spans {d[n] - d[u]} levels")

    if p.balance_pi:
        for i in net.pis:
            if d[i] != 0:
                flag("path_balanced", i, "input not at depth 0")
    if net.pos:
        top = max(d[o] for o in net.pos)
        for o in net.pos:
            if p.balance_po and d[o] != top:
                flag("path_balanced", o, f"output at depth {d[o]}, network depth {top}")
            if d[o] % p.po_phase_modulus:
                flag("path_balanced", o, f"output depth {d[o]} not a multiple of {p.po_phase_modulus}")

    siblings: Dict[NodeId, List[NodeId]] = defaultdict(list)
    for n in net.nodes():
        kind = net.kind(n)
        out = net.fanout_count(n)
        if kind is NodeKind.GATE and out > p.s_g:
            flag("properly_branched", n, f"gate out-degree {out}")
        elif kind is NodeKind.PI and out > p.s_i:
            flag("properly_branched", n, f"input out-degree {out}")
        elif kind is NodeKind.BUFFER:
            if out > p.s_b:
                flag("properly_branched", n, f"buffer out-degree {out} > {p.s_b}")
            if out == 0:
                flag("irredundant", n, "dangling buffer")
            if out < p.s_b:
                siblings[net.fanins(n)[0].node].append(n)
    for parent, under in siblings.items():
        if len(under) > 1:
            for b in under:
                flag("irredundant", b, f"under-filled sibling buffers below {parent}")
    return rep


def strip_buffers(m: MappedNetwork) -> Network:
    """Remove every buffer, reconnecting each consumer to its original driver."""
    net = m.net.copy()
    bufs = net.buffers()
    for n in list(net.nodes()):
        if net.is_buffer(n):
            continue
        for slot, s in enumerate(net.fanins(n)):
            if net.is_buffer(s.node):
                net.set_fanin(n, slot, driver(net, s))
    for b in bufs:
        net.kill(b)
    return net
