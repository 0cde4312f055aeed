"""Random network generation and exhaustive minimum buffer counts for tiny networks."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .balance import count_buffers, fanout_tree_size, owns_tree
from .core import CONST0, DepthAssignment, Network, NodeId, NodeKind, Signal, TechParams
from .schedule import asap, highest_fit, is_legal, network_depth, tree_fits, _round_up

DEFAULT_BUDGET = 10**9


class OracleBudgetExceeded(RuntimeError):
    """The exhaustive search space is larger than the configured budget."""

    def __init__(self, size: int, budget: int):
        super().__init__(f"search space {size} exceeds budget {budget}")
        self.size = size
        self.budget = budget


# -- generator ---------------------------------------------------------------------


@dataclass(frozen=True)
class GenSpec:
    n_pis: int
    n_gates: int
    n_pos: int
    max_fanout: int = 4
    seed: int = 0
    complement_rate: float = 0.3

    def __post_init__(self) -> None:
        for name in ("n_pis", "n_gates", "n_pos", "max_fanout"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


def random_mig(spec: GenSpec) -> Network:
    """Deterministic random majority network.

    Each gate takes three distinct earlier nodes, preferring nodes still below
    ``max_fanout``; missing operands are padded with constants.  Outputs
    take dangling gates first, then random nodes with spare fanout.
    """
    rng = random.Random(spec.seed)
    net = Network()
    fo: Dict[NodeId, int] = {}
    pool: List[NodeId] = []
    for k in range(spec.n_pis):
        i = net.add_pi(f"i{k}")
        pool.append(i)
        fo[i] = 0
    for k in range(spec.n_gates):
        spare = [n for n in pool if fo[n] < spec.max_fanout]
        avail = spare if len(spare) >= 3 or len(spare) == len(pool) else pool
        picks = rng.sample(avail, min(3, len(avail)))
        ops = [Signal(n, rng.random() < spec.complement_rate) for n in picks]
        while len(ops) < 3:
            ops.append(Signal(CONST0, rng.random() < 0.5))
        rng.shuffle(ops)
        for s in ops:
            if s.node != CONST0:
                fo[s.node] += 1
        g = net.add_maj(*ops, name=f"n{k}")
        pool.append(g)
        fo[g] = 0
    gates = [n for n in pool if net.is_gate(n)]
    dangling = [g for g in reversed(gates) if fo[g] == 0]
    drivers: List[NodeId] = dangling[: spec.n_pos]
    while len(drivers) < spec.n_pos:
        spare = [n for n in pool if fo[n] < spec.max_fanout] or pool
        drivers.append(rng.choice(spare))
    for k, g in enumerate(drivers):
        fo[g] += 1
        net.add_po(Signal(g, rng.random() < spec.complement_rate), name=f"o{k}")
    return net


# -- exhaustive search ------------------------------------------------------------------


def _static_lo(net: Network, p: TechParams) -> Dict[NodeId, int]:
    """Lower bound on every depth: one level per edge, two below a branching owner."""
    lo: Dict[NodeId, int] = {}
    for n in net.topological_order():
        kind = net.kind(n)
        if kind is NodeKind.CONST:
            continue
        if kind is NodeKind.PI:
            lo[n] = 0
            continue
        v = 0
        for s in net.fanins(n):
            u = s.node
            if net.is_const(u):
                continue
            step = 2 if owns_tree(net, u, p) and net.fanout_count(u) > 1 else 1
            v = max(v, lo[u] + step)
        lo[n] = v
    return lo


def _static_hi(net: Network, p: TechParams, cap: int, dangling: Dict[NodeId, int]) -> Dict[NodeId, int]:
    hi: Dict[NodeId, int] = {}
    for n in reversed(net.topological_order()):
        kind = net.kind(n)
        if kind is NodeKind.CONST:
            continue
        if kind is NodeKind.PO:
            hi[n] = cap
            continue
        sinks = net.fanout_edges(n)
        if not sinks:
            hi[n] = dangling.get(n, cap)
            continue
        step = 2 if owns_tree(net, n, p) and len(sinks) > 1 else 1
        hi[n] = min(hi[s] for s, _ in sinks) - step
    return hi


def _dangling_caps(net: Network, cap: int, early: DepthAssignment) -> Dict[NodeId, int]:
    """Gates without fanouts may lie beyond the output window; allow up to their ASAP depth."""
    return {g: max(cap, early[g]) for g in net.gates() if not net.fanout_edges(g)}


def search_space(net: Network, p: TechParams, cap: int, early: Optional[DepthAssignment] = None) -> int:
    """Product of the static per-gate depth ranges (times the output-depth choices)."""
    early = asap(net, p) if early is None else early
    lo, hi = _static_lo(net, p), _static_hi(net, p, cap, _dangling_caps(net, cap, early))
    size = 1
    for g in net.gates():
        size *= max(hi[g] - lo[g] + 1, 1)
    if p.balance_po and net.pos:
        top_lo = max(lo[o] for o in net.pos)
        size *= max((cap - top_lo) // p.po_phase_modulus + 1, 1)
    return size


def brute_force_min(
    net: Network,
    p: TechParams,
    depth_cap: Optional[int] = None,
    budget: int = DEFAULT_BUDGET,
) -> Tuple[int, DepthAssignment]:
    """Minimum irredundant buffer count over all legal assignments up to ``depth_cap``.

    Gates range from a static lower bound up to ``depth_cap`` (gates without
    fanouts up to their ASAP depth if that is later); outputs are at most
    ``depth_cap``.  Balanced inputs sit at 0, unbranched inputs at 0
    (the least constraining choice, at no cost) and other inputs at the
    highest level their fanouts allow, which is optimal for their own tree.

    Raises
    ------
    OracleBudgetExceeded
        When the static search space exceeds ``budget``.
    ValueError
        When ``depth_cap`` is below the ASAP network depth.
    """
    early = asap(net, p)
    asap_depth = network_depth(net, early)
    cap = asap_depth + 5 if depth_cap is None else depth_cap
    if cap < asap_depth:
        raise ValueError(f"depth_cap {cap} is below the ASAP depth {asap_depth}")
    size = search_space(net, p, cap, early)
    if size > budget:
        raise OracleBudgetExceeded(size, budget)

    lo = _static_lo(net, p)
    dangling = _dangling_caps(net, cap, early)
    m = p.po_phase_modulus
    order = [n for n in reversed(net.topological_order()) if net.is_gate(n)]
    pis = list(net.pis)
    out_by_driver: Dict[NodeId, List[NodeId]] = {}
    for o in net.pos:
        out_by_driver.setdefault(net.fanins(o)[0].node, []).append(o)

    floating = not p.balance_po
    top_floating = cap - cap % m
    best: List = [math.inf, None]
    d: DepthAssignment = {}

    def park_outputs(n: NodeId) -> None:
        if not floating:
            return
        for o in out_by_driver.get(n, []):
            d[o] = top_floating

    def own_cost(n: NodeId) -> Optional[int]:
        """Cost of the tree of ``n`` at its current depth, choosing its free outputs optimally."""
        outs = out_by_driver.get(n, []) if floating else []
        choices = [range(_round_up(d[n] + 1, m), top_floating + 1, m)] * len(outs)
        best_cost, best_pos = None, None
        for combo in itertools.product(*choices):
            for o, v in zip(outs, combo):
                d[o] = v
            if not tree_fits(net, d, n, d[n], p):
                continue
            cost = fanout_tree_size(net, d, n, p)
            if best_cost is None or cost < best_cost:
                best_cost, best_pos = cost, combo
                if cost == 0:
                    break
        if best_pos is not None:
            for o, v in zip(outs, best_pos):
                d[o] = v
        return best_cost

    def place_inputs(acc: int) -> None:
        total = acc
        for i in pis:
            if not p.branch_pi:
                d[i] = 0
                continue
            park_outputs(i)
            if p.balance_pi or not net.fanout_edges(i):
                xs: range = range(0, 1)
            else:
                hi = highest_fit(net, d, i, p)
                if hi is None:
                    return
                xs = range(hi, -1, -1)
            choice = None
            for x in xs:
                d[i] = x
                c = own_cost(i)
                if c is not None and (choice is None or c < choice[0]):
                    choice = (c, x, {o: d[o] for o in out_by_driver.get(i, [])})
            if choice is None:
                return
            d[i] = choice[1]
            d.update(choice[2])
            total += choice[0]
            if total >= best[0]:
                return
        best[0], best[1] = total, dict(d)

    def dfs(k: int, acc: int) -> None:
        if acc >= best[0]:
            return
        if k == len(order):
            place_inputs(acc)
            return
        g = order[k]
        park_outputs(g)
        if net.fanout_edges(g):
            hi = highest_fit(net, d, g, p, floor=lo[g])
            if hi is None:
                return
        else:
            hi = dangling[g]
        for x in range(hi, lo[g] - 1, -1):
            d[g] = x
            cost = own_cost(g)
            if cost is not None:
                dfs(k + 1, acc + cost)
            park_outputs(g)
        del d[g]

    if floating:
        for o in net.pos:
            d[o] = top_floating
    if p.balance_po and net.pos:
        top_lo = _round_up(max(lo[o] for o in net.pos), m)
        tops: List[Optional[int]] = list(range(top_lo, cap + 1, m))
    else:
        tops = [None]
    for top in tops:
        if top is not None:
            for o in net.pos:
                d[o] = top
        dfs(0, 0)
    if best[1] is None:
        raise ValueError("no legal assignment within the depth cap")
    witness = best[1]
    if floating:
        _settle_input_outputs(net, witness, p)
    verdict = is_legal(net, witness, p)
    if not verdict or count_buffers(net, witness, p) != best[0]:
        raise AssertionError(f"oracle witness is inconsistent: {verdict.reason}")
    return best[0], witness


def _settle_input_outputs(net: Network, d: DepthAssignment, p: TechParams) -> None:
    """Lower outputs fed directly by inputs; only cosmetic, the cost is already counted."""
    for o in net.pos:
        src = net.fanins(o)[0].node
        if net.is_pi(src) and not p.branch_pi:
            d[o] = _round_up(d[src] + 1, p.po_phase_modulus)
