"""Initial depth assignments (ASAP, ALAP) and legality checking."""

from __future__ import annotations

import enum
from collections import Counter
from typing import Dict, List, NamedTuple, Optional

from .balance import count_buffers, level0_capacity, owns_tree, tree_profile
from .core import (
    DepthAssignment,
    IllegalDepthAssignment,
    Network,
    NodeId,
    NodeKind,
    TechParams,
)


class ScheduleChoice(enum.Enum):
    ASAP = "asap"
    ALAP = "alap"
    BEST = "best"


class InfeasibleBound(ValueError):
    """No legal assignment fits under the requested depth bound."""


class Legality(NamedTuple):
    ok: bool
    node: Optional[NodeId] = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def reserved_levels(fanout_count: int, s_b: int) -> int:
    """Smallest ``k`` with ``s_b ** k >= fanout_count``, in exact integer arithmetic."""
    if fanout_count < 1:
        raise ValueError("fanout_count must be positive")
    if s_b < 2:
        raise ValueError("s_b must be at least 2")
    k, reach = 0, 1
    while reach < fanout_count:
        reach *= s_b
        k += 1
    return k


def min_fanout_distance(net: Network, n: NodeId, p: TechParams) -> int:
    """Relative depth every fanout of ``n`` keeps under the reservation rule.

    A multi-fanout owner needs room for a full splitter tree below its
    fanouts: one level per splitter layer plus the fanout level itself.
    """
    if not owns_tree(net, n, p):
        return 1
    return 1 + reserved_levels(max(1, net.fanout_count(n)), p.s_b)


def root_edges_at(net: Network, d: DepthAssignment, n: NodeId, at: int, s_b: int) -> Optional[int]:
    """Edges leaving ``n`` if it sat at depth ``at``; ``None`` if a fanout is not above it."""
    hist = Counter(d[sink] - at for sink, _ in net.fanout_edges(n))
    if hist and min(hist) < 1:
        return None
    return tree_profile(hist, s_b)[1]


def tree_fits(net: Network, d: DepthAssignment, n: NodeId, at: int, p: TechParams) -> bool:
    """Whether the fanout tree of ``n`` is buildable with ``n`` at depth ``at``."""
    if net.is_const(n):
        return True
    if not owns_tree(net, n, p):
        return all(d[sink] > at for sink, _ in net.fanout_edges(n))
    edges = root_edges_at(net, d, n, at, p.s_b)
    return edges is not None and edges <= level0_capacity(net, n, p)


def highest_fit(net: Network, d: DepthAssignment, n: NodeId, p: TechParams, floor: int = 0) -> Optional[int]:
    """Largest depth of ``n`` (given its fanouts' depths) at which its tree is legal."""
    sinks = net.fanout_edges(n)
    if not sinks:
        return None
    at = min(d[s] for s, _ in sinks) - 1
    while at >= floor and not tree_fits(net, d, n, at, p):
        at -= 1
    return at if at >= floor else None


def is_legal(net: Network, d: DepthAssignment, p: TechParams) -> Legality:
    """Check that ``d`` extends to a path-balanced, properly-branched mapping.

    Returns a :class:`Legality` that is falsy on failure and names the
    first offending node.
    """
    for n in net.nodes():
        if net.is_const(n):
            continue
        if n not in d:
            return Legality(False, n, f"node {n} has no depth")
        if d[n] < 0:
            return Legality(False, n, f"node {n} has negative depth {d[n]}")
    if p.balance_pi:
        for i in net.pis:
            if d[i] != 0:
                return Legality(False, i, f"input {i} at depth {d[i]}, expected 0")
    if net.pos:
        top = max(d[o] for o in net.pos)
        for o in net.pos:
            if p.balance_po and d[o] != top:
                return Legality(False, o, f"output {o} at depth {d[o]}, network depth {top}")
            if d[o] % p.po_phase_modulus:
                return Legality(
                    False, o, f"output {o} depth {d[o]} not a multiple of {p.po_phase_modulus}"
                )
    for n in net.nodes():
        kind = net.kind(n)
        if kind in (NodeKind.CONST, NodeKind.PO, NodeKind.BUFFER):
            continue
        for sink, _ in net.fanout_edges(n):
            if d[sink] - d[n] < 1:
                return Legality(False, n, f"fanout {sink} of {n} at relative depth {d[sink] - d[n]}")
        if owns_tree(net, n, p):
            edges = root_edges_at(net, d, n, d[n], p.s_b)
            cap = level0_capacity(net, n, p)
            if edges is not None and edges > cap:
                return Legality(
                    False, n, f"node {n} would drive {edges} edges directly (capacity {cap})"
                )
    return Legality(True)


def _round_up(value: int, modulus: int) -> int:
    return -(-value // modulus) * modulus


def asap(net: Network, p: TechParams) -> DepthAssignment:
    """Earliest depths under splitter-level reservation.

    Every fanout of a tree owner with ``k`` fanouts is placed at least
    ``1 + reserved_levels(k, s_b)`` levels above it.  Outputs are then
    aligned (if balanced) and rounded up to the phase modulus.
    """
    d: DepthAssignment = {}
    for n in net.topological_order():
        kind = net.kind(n)
        if kind is NodeKind.CONST:
            continue
        if kind is NodeKind.PI:
            d[n] = 0
            continue
        lo = 0
        for s in net.fanins(n):
            u = s.node
            if net.is_const(u):
                continue
            lo = max(lo, d[u] + min_fanout_distance(net, u, p))
        d[n] = lo
    _place_outputs_at_least(net, d, p)
    return d


def _place_outputs_at_least(net: Network, d: DepthAssignment, p: TechParams) -> None:
    if not net.pos:
        return
    if p.balance_po:
        top = max(d[o] for o in net.pos)
        for o in net.pos:
            d[o] = top
    for o in net.pos:
        d[o] = _round_up(d[o], p.po_phase_modulus)


def network_depth(net: Network, d: DepthAssignment) -> int:
    return max((d[o] for o in net.pos), default=0)


def alap(net: Network, p: TechParams, bound: Optional[int] = None) -> DepthAssignment:
    """Latest depths such that the assignment stays legal and within ``bound``.

    Each tree owner is placed, in reverse topological order, at the
    highest depth where its own fanout tree is still buildable.  Gates
    without fanouts go to ``bound`` or their ASAP depth, whichever is later.  Floating
    inputs (not balanced, branched) are treated like gates; balanced inputs
    stay at 0.  Movable outputs are finally lowered to the cheapest position
    for their driver's tree.

    Raises
    ------
    InfeasibleBound
        If no legal assignment exists below ``bound``.
    """
    early = asap(net, p)
    if bound is None:
        bound = network_depth(net, early)
    top = bound - bound % p.po_phase_modulus
    if net.pos and top < 1:
        raise InfeasibleBound(f"bound {bound} leaves no room for outputs")
    d: DepthAssignment = {o: top for o in net.pos}
    for n in reversed(net.topological_order()):
        kind = net.kind(n)
        if kind in (NodeKind.CONST, NodeKind.PO):
            continue
        floating_pi = kind is NodeKind.PI and not p.balance_pi and p.branch_pi
        if kind is NodeKind.GATE or floating_pi:
            if not net.fanout_edges(n):
                # dangling logic is not bounded by the outputs and may sit deeper
                d[n] = max(bound, early[n]) if kind is NodeKind.GATE else 0
                continue
            at = highest_fit(net, d, n, p)
            if at is None:
                raise InfeasibleBound(f"node {n} cannot be placed below bound {bound}")
            d[n] = at
        else:
            d[n] = 0
    if p.pos_movable:
        settle_outputs(net, d, p)
    verdict = is_legal(net, d, p)
    if not verdict:
        raise InfeasibleBound(f"bound {bound} is infeasible: {verdict.reason}")
    return d


def settle_outputs(net: Network, d: DepthAssignment, p: TechParams, ceiling: Optional[int] = None) -> None:
    """Move each floating output to the position minimizing its driver's tree.

    Candidates lie between one level above the driver and ``ceiling``
    (default: the current depth of the output); ties go to the lowest.
    """
    from .balance import fanout_tree_size

    for o in net.pos:
        g = net.fanins(o)[0].node
        hi = d[o] if ceiling is None else max(ceiling, d[o])
        best_at, best_cost = d[o], None
        for at in range(d[g] + 1, hi + 1):
            d[o] = at
            if not owns_tree(net, g, p):
                cost = 0
            elif not tree_fits(net, d, g, d[g], p):
                continue
            else:
                cost = fanout_tree_size(net, d, g, p)
            if best_cost is None or cost < best_cost:
                best_at, best_cost = at, cost
        d[o] = best_at


def initial_schedule(net: Network, p: TechParams, choice: ScheduleChoice = ScheduleChoice.BEST) -> DepthAssignment:
    """Initial depth assignment; ``BEST`` keeps whichever of ASAP/ALAP needs fewer buffers."""
    d_asap = asap(net, p)
    if choice is ScheduleChoice.ASAP:
        return d_asap
    d_alap = alap(net, p, network_depth(net, d_asap))
    if choice is ScheduleChoice.ALAP:
        return d_alap
    if count_buffers(net, d_alap, p) < count_buffers(net, d_asap, p):
        return d_alap
    return d_asap
