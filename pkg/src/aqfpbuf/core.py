"""Graph model for unmapped and mapped majority-inverter networks.

A :class:`Network` stores primary inputs, primary outputs, gates and (in mapped
networks) buffers as nodes with append-only integer ids.  Every node keeps an
ordered tuple of fanin :class:`Signal` values; a signal is a node id plus a
complement flag.  Node 0 is always the constant-0 source; constant 1 is the
complemented constant-0 signal.

Depth assignments are plain ``dict[NodeId, int]`` mappings.
"""

from __future__ import annotations

import enum
import heapq
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple

NodeId = int
DepthAssignment = Dict[NodeId, int]

CONST0: NodeId = 0


class NodeKind(enum.Enum):
    CONST = "const"
    PI = "pi"
    PO = "po"
    GATE = "gate"
    BUFFER = "buffer"


class Signal(NamedTuple):
    """Reference to a node output, optionally complemented."""

    node: NodeId
    complemented: bool = False

    def __invert__(self) -> "Signal":
        return Signal(self.node, not self.complemented)


class NetworkError(Exception):
    """Structural misuse of a network (unknown node, bad arity, ...)."""


class IllegalDepthAssignment(Exception):
    """A depth assignment admits no path-balanced, properly-branched mapping."""

    def __init__(self, message: str, node: Optional[NodeId] = None):
        super().__init__(message)
        self.node = node


@dataclass(frozen=True)
class TechParams:
    """Technology assumptions for buffer and splitter insertion.

    Parameters
    ----------
    s_b : int
        Splitting capacity of a buffer (maximum out-degree), at least 2.
    branch_pi : bool
        If true, primary inputs have out-degree 1 and need splitter trees.
        If false, primary inputs act as unlimited, always-available sources.
    balance_pi : bool
        Pin every primary input to depth 0.
    balance_po : bool
        Force every primary output to the common network depth.
    po_phase_modulus : int
        Primary-output depths must be multiples of this value.
    """

    s_b: int = 3
    branch_pi: bool = True
    balance_pi: bool = True
    balance_po: bool = True
    po_phase_modulus: int = 1

    def __post_init__(self) -> None:
        if not isinstance(self.s_b, int) or self.s_b < 2:
            raise ValueError(f"s_b must be an integer >= 2, got {self.s_b!r}")
        if not isinstance(self.po_phase_modulus, int) or self.po_phase_modulus < 1:
            raise ValueError(
                f"po_phase_modulus must be an integer >= 1, got {self.po_phase_modulus!r}"
            )

    @property
    def s_g(self) -> int:
        return 1

    @property
    def s_i(self) -> float:
        return 1 if self.branch_pi else math.inf

    @property
    def pos_movable(self) -> bool:
        return not self.balance_po and self.po_phase_modulus == 1

    def replace(self, **changes) -> "TechParams":
        values = {
            "s_b": self.s_b,
            "branch_pi": self.branch_pi,
            "balance_pi": self.balance_pi,
            "balance_po": self.balance_po,
            "po_phase_modulus": self.po_phase_modulus,
        }
        values.update(changes)
        return TechParams(**values)

    def as_dict(self) -> dict:
        return {
            "sb": self.s_b,
            "balance_pi": self.balance_pi,
            "balance_po": self.balance_po,
            "branch_pi": self.branch_pi,
            "po_phase_modulus": self.po_phase_modulus,
        }


class Network:
    """Directed acyclic network of PIs, POs, gates and buffers.

    Nodes are never removed; :meth:`kill` tombstones a node so that ids stay
    stable.  Fanouts are derived lazily from fanins and cached until the next
    mutation.
    """

    def __init__(self) -> None:
        self._kind: List[NodeKind] = [NodeKind.CONST]
        self._fanins: List[Tuple[Signal, ...]] = [()]
        self._names: List[Optional[str]] = [None]
        self._alive: List[bool] = [True]
        self.pis: List[NodeId] = []
        self.pos: List[NodeId] = []
        self._fanout_cache: Optional[List[List[Tuple[NodeId, int]]]] = None
        self._topo_cache: Optional[List[NodeId]] = None

    # -- construction -------------------------------------------------------

    def _append(self, kind: NodeKind, fanins: Sequence[Signal], name: Optional[str]) -> NodeId:
        for s in fanins:
            self._check(s.node)
            if self._kind[s.node] is NodeKind.PO:
                raise NetworkError(f"primary output {s.node} cannot drive other nodes")
        nid = len(self._kind)
        self._kind.append(kind)
        self._fanins.append(tuple(Signal(s.node, bool(s.complemented)) for s in fanins))
        self._names.append(name)
        self._alive.append(True)
        self._invalidate()
        return nid

    def add_pi(self, name: Optional[str] = None) -> NodeId:
        nid = self._append(NodeKind.PI, (), name)
        self.pis.append(nid)
        return nid

    def add_gate(self, fanins: Sequence[Signal], name: Optional[str] = None) -> NodeId:
        if len(fanins) < 1:
            raise NetworkError("a gate needs at least one fanin")
        return self._append(NodeKind.GATE, fanins, name)

    def add_maj(self, a: Signal, b: Signal, c: Signal, name: Optional[str] = None) -> NodeId:
        return self.add_gate((a, b, c), name)

    def add_po(self, signal: Signal, name: Optional[str] = None) -> NodeId:
        if self._kind[self._check(signal.node)] is NodeKind.CONST:
            raise NetworkError("primary outputs must be driven by an input, gate or buffer")
        nid = self._append(NodeKind.PO, (signal,), name)
        self.pos.append(nid)
        return nid

    def add_buffer(self, signal: Signal, name: Optional[str] = None) -> NodeId:
        return self._append(NodeKind.BUFFER, (signal,), name)

    def set_fanin(self, node: NodeId, slot: int, signal: Signal) -> None:
        self._check(node)
        self._check(signal.node)
        fanins = list(self._fanins[node])
        fanins[slot] = signal
        self._fanins[node] = tuple(fanins)
        self._invalidate()

    def kill(self, node: NodeId) -> None:
        if self._kind[self._check(node)] in (NodeKind.CONST, NodeKind.PI, NodeKind.PO):
            raise NetworkError("only gates and buffers can be removed")
        self._alive[node] = False
        self._invalidate()

    def copy(self) -> "Network":
        other = Network.__new__(Network)
        other._kind = list(self._kind)
        other._fanins = list(self._fanins)
        other._names = list(self._names)
        other._alive = list(self._alive)
        other.pis = list(self.pis)
        other.pos = list(self.pos)
        other._fanout_cache = None
        other._topo_cache = None
        return other

    def _invalidate(self) -> None:
        self._fanout_cache = None
        self._topo_cache = None

    def _check(self, node: NodeId) -> NodeId:
        if not (0 <= node < len(self._kind)) or not self._alive[node]:
            raise KeyError(f"unknown node id {node}")
        return node

    # -- queries ------------------------------------------------------------

    def __len__(self) -> int:
        return sum(self._alive)

    def __contains__(self, node: object) -> bool:
        return isinstance(node, int) and 0 <= node < len(self._kind) and self._alive[node]

    def kind(self, node: NodeId) -> NodeKind:
        return self._kind[self._check(node)]

    def name(self, node: NodeId) -> Optional[str]:
        return self._names[self._check(node)]

    def set_name(self, node: NodeId, name: Optional[str]) -> None:
        self._names[self._check(node)] = name

    def fanins(self, node: NodeId) -> Tuple[Signal, ...]:
        return self._fanins[self._check(node)]

    def nodes(self) -> Iterator[NodeId]:
        return (n for n in range(len(self._kind)) if self._alive[n])

    def gates(self) -> List[NodeId]:
        return [n for n in self.nodes() if self._kind[n] is NodeKind.GATE]

    def buffers(self) -> List[NodeId]:
        return [n for n in self.nodes() if self._kind[n] is NodeKind.BUFFER]

    @property
    def num_gates(self) -> int:
        return len(self.gates())

    def is_pi(self, node: NodeId) -> bool:
        return self.kind(node) is NodeKind.PI

    def is_po(self, node: NodeId) -> bool:
        return self.kind(node) is NodeKind.PO

    def is_gate(self, node: NodeId) -> bool:
        return self.kind(node) is NodeKind.GATE

    def is_buffer(self, node: NodeId) -> bool:
        return self.kind(node) is NodeKind.BUFFER

    def is_const(self, node: NodeId) -> bool:
        return self.kind(node) is NodeKind.CONST

    def fanout_edges(self, node: NodeId) -> List[Tuple[NodeId, int]]:
        """Direct outgoing edges of ``node`` as ``(sink, fanin_slot)`` pairs."""
        self._check(node)
        if self._fanout_cache is None:
            cache: List[List[Tuple[NodeId, int]]] = [[] for _ in self._kind]
            for n in self.nodes():
                for slot, s in enumerate(self._fanins[n]):
                    cache[s.node].append((n, slot))
            self._fanout_cache = cache
        return self._fanout_cache[node]

    def fanout_count(self, node: NodeId) -> int:
        return len(self.fanout_edges(node))

    def topological_order(self) -> List[NodeId]:
        """All live nodes ordered so that every fanin precedes its fanouts."""
        if self._topo_cache is None:
            indeg = {n: len(self._fanins[n]) for n in self.nodes()}
            ready = [n for n, k in indeg.items() if k == 0]
            heapq.heapify(ready)
            order: List[NodeId] = []
            while ready:
                n = heapq.heappop(ready)
                order.append(n)
                for sink, _ in self.fanout_edges(n):
                    indeg[sink] -= 1
                    if indeg[sink] == 0:
                        heapq.heappush(ready, sink)
            if len(order) != len(indeg):
                raise NetworkError("network contains a cycle")
            self._topo_cache = order
        return list(self._topo_cache)

    def __repr__(self) -> str:
        return (
            f"Network(pis={len(self.pis)}, pos={len(self.pos)}, "
            f"gates={self.num_gates}, buffers={len(self.buffers())})"
        )


@dataclass
class MappedNetwork:
    """A network with buffers inserted and a depth for every non-constant node."""

    net: Network
    depth: DepthAssignment = field(default_factory=dict)

    @property
    def buffers(self) -> List[NodeId]:
        return self.net.buffers()

    @property
    def num_buffers(self) -> int:
        return len(self.net.buffers())

    @property
    def network_depth(self) -> int:
        return max((self.depth[o] for o in self.net.pos), default=0)


# -- structural queries ------------------------------------------------------


def fanouts(net: Network, n: NodeId) -> set:
    """Gates and POs fed by ``n``, looking through any intermediate buffers."""
    kind = net.kind(n)
    if kind not in (NodeKind.PI, NodeKind.GATE, NodeKind.CONST):
        raise NetworkError(f"fanouts are defined for inputs and gates, not {kind.value}")
    found = set()
    stack = [n]
    while stack:
        for sink, _ in net.fanout_edges(stack.pop()):
            if net.is_buffer(sink):
                stack.append(sink)
            else:
                found.add(sink)
    return found


def sink_edges(net: Network, n: NodeId) -> List[Tuple[NodeId, int]]:
    """Like :func:`fanouts`, but as one ``(sink, slot)`` pair per edge."""
    edges = []
    stack = [n]
    while stack:
        for sink, slot in net.fanout_edges(stack.pop()):
            if net.is_buffer(sink):
                stack.append(sink)
            else:
                edges.append((sink, slot))
    edges.sort()
    return edges


def driver(net: Network, signal: Signal) -> Signal:
    """Follow ``signal`` back through buffers to the PI, gate or constant driving it."""
    node, compl = signal
    while net.is_buffer(node):
        inner = net.fanins(node)[0]
        node, compl = inner.node, compl ^ inner.complemented
    return Signal(node, compl)


def fanins(net: Network, n: NodeId) -> set:
    """PIs, gates and constants feeding ``n``, looking through buffers."""
    return {driver(net, s).node for s in net.fanins(n)}


def relative_depth(net: Network, d: DepthAssignment, n: NodeId, n_o: NodeId) -> int:
    if n_o not in fanouts(net, n):
        raise NetworkError(f"node {n_o} is not a fanout of {n}")
    return d[n_o] - d[n]


def fanout_histogram(net: Network, d: DepthAssignment, n: NodeId) -> Counter:
    """Count of fanout edges of ``n`` per relative depth."""
    base = d[n]
    return Counter(d[sink] - base for sink, _ in sink_edges(net, n))


def logic_depth(net: Network) -> int:
    """Number of gate levels on the longest PI-to-PO path (POs not counted)."""
    level: Dict[NodeId, int] = {}
    for n in net.topological_order():
        kind = net.kind(n)
        if kind in (NodeKind.CONST, NodeKind.PI):
            level[n] = 0
        elif kind is NodeKind.GATE:
            level[n] = 1 + max((level[s.node] for s in net.fanins(n)), default=0)
        else:
            level[n] = level[net.fanins(n)[0].node]
    return max((level[o] for o in net.pos), default=0)


def networks_equal(a: Network, b: Network) -> bool:
    """Exact equality of live nodes, kinds and fanins (ids included)."""
    if list(a.nodes()) != list(b.nodes()) or a.pis != b.pis or a.pos != b.pos:
        return False
    return all(a.kind(n) == b.kind(n) and a.fanins(n) == b.fanins(n) for n in a.nodes())


def structurally_equal(a: Network, b: Network) -> bool:
    """Isomorphism up to node ids and names, keeping PI/PO order and fanin order.

    Nodes are identified by structural hashing, so two networks match when
    their POs have identical cones in order and their gate and buffer
    multisets coincide.
    """
    if len(a.pis) != len(b.pis) or len(a.pos) != len(b.pos):
        return False
    sa, sb = _signatures_shared(a, b)
    if [sa[o] for o in a.pos] != [sb[o] for o in b.pos]:
        return False
    inner = (NodeKind.GATE, NodeKind.BUFFER)
    ca = Counter(sa[n] for n in a.nodes() if a.kind(n) in inner)
    cb = Counter(sb[n] for n in b.nodes() if b.kind(n) in inner)
    return ca == cb


def _signatures_shared(a: Network, b: Network) -> Tuple[Dict[NodeId, int], Dict[NodeId, int]]:
    table: Dict[tuple, int] = {}
    out = []
    for net in (a, b):
        sig: Dict[NodeId, int] = {}
        for i, p in enumerate(net.pis):
            sig[p] = table.setdefault(("pi", i), len(table))
        for n in net.topological_order():
            kind = net.kind(n)
            if kind is NodeKind.PI:
                continue
            if kind is NodeKind.CONST:
                key: tuple = ("const",)
            else:
                key = (kind.value,) + tuple((sig[s.node], s.complemented) for s in net.fanins(n))
            sig[n] = table.setdefault(key, len(table))
        out.append(sig)
    return out[0], out[1]


def iter_sources(net: Network) -> Iterable[NodeId]:
    """PIs and gates: the nodes that own fanout trees."""
    return (n for n in net.nodes() if net.kind(n) in (NodeKind.PI, NodeKind.GATE))
