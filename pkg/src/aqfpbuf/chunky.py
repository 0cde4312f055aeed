"""Chunks of closely-connected nodes, their slack and benefit, and chunk moves."""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Set, Tuple

from .balance import fanout_tree_size, owns_tree
from .core import DepthAssignment, Network, NetworkError, NodeId, NodeKind, TechParams
from .schedule import is_legal, tree_fits


class InterfaceKind(enum.Enum):
    II = "II"
    OI = "OI"


class Direction(enum.Enum):
    UP = "up"
    DOWN = "down"

    @property
    def sign(self) -> int:
        return 1 if self is Direction.UP else -1


class MoveInvariantError(RuntimeError):
    """A move computed as legal produced an illegal assignment."""


@dataclass(frozen=True, order=True)
class Interface:
    g_c: NodeId
    g_f: NodeId
    kind: InterfaceKind = field(compare=False)


@dataclass
class Chunk:
    """Members in discovery order, boundary interfaces, and riders.

    Riders are floating outputs hanging off members; they shift with the
    chunk but are neither members nor interfaces.
    """

    members: List[NodeId]
    interfaces: List[Interface]
    riders: List[NodeId] = field(default_factory=list)

    @property
    def member_set(self) -> Set[NodeId]:
        return set(self.members)

    @property
    def iis(self) -> List[Interface]:
        return [t for t in self.interfaces if t.kind is InterfaceKind.II]

    @property
    def ois(self) -> List[Interface]:
        return [t for t in self.interfaces if t.kind is InterfaceKind.OI]

    def moved(self) -> List[NodeId]:
        return self.members + self.riders


@dataclass
class MovePlan:
    chunk: Chunk
    direction: Direction
    l: int
    predicted_benefit: int
    actual_benefit: Optional[int] = None

    @property
    def delta(self) -> int:
        return self.direction.sign * self.l


# -- node classes ---------------------------------------------------------------


def is_movable(net: Network, n: NodeId, p: TechParams) -> bool:
    kind = net.kind(n)
    if kind is NodeKind.GATE:
        return True
    if kind is NodeKind.PI:
        return not p.balance_pi and p.branch_pi
    if kind is NodeKind.PO:
        return p.pos_movable
    return False


def _ignored(net: Network, n: NodeId, p: TechParams) -> bool:
    """Sources that constrain nothing but the depth floor: constants and unbranched PIs."""
    return net.is_const(n) or (net.is_pi(n) and not p.branch_pi)


def depth_floor(net: Network, n: NodeId, p: TechParams) -> int:
    """Lowest depth ``n`` may take regardless of interfaces."""
    if any(net.is_pi(s.node) and not p.branch_pi for s in net.fanins(n)):
        return 1
    return 0


def _unique(nodes: Iterable[NodeId]) -> List[NodeId]:
    return list(dict.fromkeys(nodes))


def _fanin_nodes(net: Network, n: NodeId) -> List[NodeId]:
    return _unique(s.node for s in net.fanins(n))


def _fanout_nodes(net: Network, n: NodeId) -> List[NodeId]:
    return _unique(sink for sink, _ in net.fanout_edges(n))


# -- chunk construction -------------------------------------------------------------


def are_close(net: Network, d: Mapping[NodeId, int], g: NodeId, g_o: NodeId) -> bool:
    """Whether ``g_o`` sits tightly above its fanin ``g``.

    A pair is close when the fanout is directly above (which, in a legal
    assignment, means it is the only one) or, for a multi-fanout ``g``, one
    splitter level above.
    """
    if g_o not in _fanout_nodes(net, g):
        raise NetworkError(f"node {g_o} is not a fanout of {g}")
    rd = d[g_o] - d[g]
    return rd == 1 or (net.fanout_count(g) > 1 and rd == 2)


def build_chunk(net: Network, d: Mapping[NodeId, int], p: TechParams, g0: NodeId) -> Chunk:
    """Close the movable node ``g0`` under close pairs, fanins first, FIFO order."""
    if not is_movable(net, g0, p):
        raise NetworkError(f"node {g0} is not movable under {p}")
    members = [g0]
    inside = {g0}
    riders: List[NodeId] = []
    boundary: List[Interface] = []
    work = deque([g0])
    while work:
        g_c = work.popleft()
        for g_f in _fanin_nodes(net, g_c):
            if _ignored(net, g_f, p):
                continue
            if g_f in inside:
                continue
            if is_movable(net, g_f, p) and are_close(net, d, g_f, g_c):
                members.append(g_f)
                inside.add(g_f)
                work.append(g_f)
            else:
                boundary.append(Interface(g_c, g_f, InterfaceKind.II))
        for g_f in _fanout_nodes(net, g_c):
            if g_f in inside:
                continue
            close = are_close(net, d, g_c, g_f)
            if is_movable(net, g_f, p) and close:
                members.append(g_f)
                inside.add(g_f)
                work.append(g_f)
            elif net.is_po(g_f) and p.pos_movable:
                riders.append(g_f)
                inside.add(g_f)
            else:
                boundary.append(Interface(g_c, g_f, InterfaceKind.OI))
    # a pair recorded before its far end joined the chunk is no longer a boundary
    interfaces = []
    seen = set()
    for t in boundary:
        if t.g_f in inside:
            continue
        key = (t.g_c, t.g_f, t.kind)
        if key not in seen:
            seen.add(key)
            interfaces.append(t)
    return Chunk(members, interfaces, riders)


# -- slack ------------------------------------------------------------------------


def interface_slack(net: Network, d: Mapping[NodeId, int], t: Interface) -> int:
    """Formula slack of one interface: one level less if the lower end branches."""
    if t.kind is InterfaceKind.II:
        lower, rd = t.g_f, d[t.g_c] - d[t.g_f]
    else:
        lower, rd = t.g_c, d[t.g_f] - d[t.g_c]
    return rd - 1 if net.fanout_count(lower) == 1 else rd - 2


class _Shifted(Mapping):
    """Read-only view of ``d`` with the nodes in ``moved`` shifted by ``delta``."""

    def __init__(self, d: Mapping[NodeId, int], moved: Set[NodeId], delta: int):
        self._d, self._moved, self._delta = d, moved, delta

    def __getitem__(self, n: NodeId) -> int:
        v = self._d[n]
        return v + self._delta if n in self._moved else v

    def __iter__(self) -> Iterator[NodeId]:
        return iter(self._d)

    def __len__(self) -> int:
        return len(self._d)


def affected_owners(net: Network, chunk: Chunk, p: TechParams) -> List[NodeId]:
    """Tree owners whose fanout trees can change when ``chunk`` moves."""
    owners = [m for m in chunk.members if owns_tree(net, m, p)]
    owners += [t.g_f for t in chunk.iis if owns_tree(net, t.g_f, p)]
    return _unique(owners)


def move_is_legal(net: Network, d: Mapping[NodeId, int], p: TechParams, chunk: Chunk, delta: int) -> bool:
    moved = set(chunk.moved())
    view = _Shifted(d, moved, delta)
    for m in chunk.members:
        if view[m] < depth_floor(net, m, p):
            return False
    for n in affected_owners(net, chunk, p):
        if not tree_fits(net, view, n, view[n], p):
            return False
    for t in chunk.iis:
        if view[t.g_c] - view[t.g_f] < 1:
            return False
    return True


def _clamp(net: Network, d: Mapping[NodeId, int], p: TechParams, chunk: Chunk, sign: int, slack: float) -> float:
    if slack == math.inf:
        return slack if move_is_legal(net, d, p, chunk, sign) else 0
    l = int(slack)
    while l > 0 and not move_is_legal(net, d, p, chunk, sign * l):
        l -= 1
    return max(l, 0)


def slack_down(
    net: Network, d: Mapping[NodeId, int], p: TechParams, chunk: Chunk
) -> Tuple[int, Dict[Interface, int]]:
    """Levels the chunk can move down, with the formula slack of every input interface.

    The minimum over interfaces is further bounded by the members' depth
    floors and then reduced until the move is verified legal.
    """
    per = {t: interface_slack(net, d, t) for t in chunk.iis}
    slack = min(per.values(), default=math.inf)
    for m in chunk.members:
        slack = min(slack, d[m] - depth_floor(net, m, p))
    return int(_clamp(net, d, p, chunk, -1, max(slack, 0))), per


def slack_up(
    net: Network, d: Mapping[NodeId, int], p: TechParams, chunk: Chunk
) -> float:
    """Levels the chunk can move up; ``math.inf`` when nothing bounds it.

    Members without any fanout are kept at or below the current network
    depth so that dangling logic cannot drift upward forever.
    """
    slack = min((interface_slack(net, d, t) for t in chunk.ois), default=math.inf)
    top = max((d[o] for o in net.pos), default=0)
    for m in chunk.members:
        if not net.fanout_edges(m) and not net.is_po(m):
            slack = min(slack, max(top - d[m], 0))
    return _clamp(net, d, p, chunk, 1, max(slack, 0))


# -- benefit -------------------------------------------------------------------------


def classify_bii(net: Network, d: Mapping[NodeId, int], t: Interface) -> bool:
    """True iff ``g_c`` is strictly the highest fanout of ``g_f``."""
    if t.kind is not InterfaceKind.II:
        raise ValueError("only input interfaces can be beneficial")
    rd = d[t.g_c] - d[t.g_f]
    return all(d[o] - d[t.g_f] < rd for o in _fanout_nodes(net, t.g_f) if o != t.g_c)


def predicted_benefit(
    net: Network, d: Mapping[NodeId, int], chunk: Chunk, direction: Direction, l: int
) -> int:
    distinct_oi = len({t.g_c for t in chunk.ois})
    if direction is Direction.DOWN:
        x = sum(classify_bii(net, d, t) for t in chunk.iis)
        y = distinct_oi
    else:
        x, y = distinct_oi, len(chunk.iis)
    return l * (x - y)


def local_cost(net: Network, d: Mapping[NodeId, int], p: TechParams, owners: Iterable[NodeId]) -> int:
    return sum(fanout_tree_size(net, d, n, p) for n in owners)


def move_benefit(net: Network, d: Mapping[NodeId, int], p: TechParams, chunk: Chunk, delta: int) -> int:
    """Exact buffer reduction of shifting the chunk by ``delta``, recounting only affected trees."""
    if delta == 0:
        return 0
    owners = affected_owners(net, chunk, p)
    view = _Shifted(d, set(chunk.moved()), delta)
    return local_cost(net, d, p, owners) - local_cost(net, view, p, owners)


def plan_move(
    net: Network, d: Mapping[NodeId, int], p: TechParams, chunk: Chunk, direction: Direction, l: int
) -> MovePlan:
    return MovePlan(chunk, direction, l, predicted_benefit(net, d, chunk, direction, l))


def apply_move(
    net: Network, d: DepthAssignment, p: TechParams, plan: MovePlan, check: bool = True
) -> DepthAssignment:
    """Return a new assignment with the chunk shifted; fills ``plan.actual_benefit``.

    Raises
    ------
    MoveInvariantError
        If the shifted assignment is not legal.
    """
    delta = plan.delta
    plan.actual_benefit = move_benefit(net, d, p, plan.chunk, delta)
    if delta == 0:
        return dict(d)
    out = dict(d)
    for n in plan.chunk.moved():
        out[n] += delta
    if check:
        verdict = is_legal(net, out, p)
        if not verdict:
            raise MoveInvariantError(f"move {plan.direction.value} {plan.l} is illegal: {verdict.reason}")
    return out
