"""Small hand-built networks with known answers, shared by tests and demos."""

from __future__ import annotations

from typing import Dict, NamedTuple

from .core import CONST0, DepthAssignment, Network, Signal, TechParams

ZERO = Signal(CONST0)
ONE = ~ZERO


class Fixture(NamedTuple):
    net: Network
    depth: DepthAssignment
    params: TechParams
    ids: Dict[str, int]


def star_tree_example() -> Fixture:
    """One input feeding four outputs: one two levels up, three five levels up.

    With ``s_b = 2`` the irredundant tree needs exactly five buffers.
    """
    net = Network()
    g = net.add_pi("g")
    outs = [net.add_po(Signal(g), f"o{k}") for k in range(4)]
    d = {g: 0, outs[0]: 2, outs[1]: 5, outs[2]: 5, outs[3]: 5}
    p = TechParams(s_b=2, balance_pi=True, balance_po=False, branch_pi=True)
    ids = {"g": g, **{f"o{k}": o for k, o in enumerate(outs)}}
    return Fixture(net, d, p, ids)


def late_gate_example() -> Fixture:
    """A gate that ASAP places too early: lifting it one level saves a buffer.

    ``g`` shares its inputs with two slower side paths, so under ASAP its
    only fanout ``g3`` sits two levels above it.  ``depth`` is the ASAP
    assignment.
    """
    net = Network()
    a, b, c = net.add_pi("a"), net.add_pi("b"), net.add_pi("c")
    n4 = net.add_maj(Signal(c), ZERO, ONE, "n4")
    n8 = net.add_maj(Signal(c), ONE, ZERO, "n8")
    g = net.add_maj(Signal(a), Signal(b), ZERO, "g")
    n9 = net.add_maj(Signal(a), Signal(n4), ZERO, "n9")
    n12 = net.add_maj(Signal(b), Signal(n8), ZERO, "n12")
    g3 = net.add_maj(Signal(g), Signal(n9), Signal(n12), "g3")
    f = net.add_po(Signal(g3), "f")
    p = TechParams(s_b=2, balance_pi=True, balance_po=True, branch_pi=True)
    ids = dict(a=a, b=b, c=c, n4=n4, n8=n8, g=g, n9=n9, n12=n12, g3=g3, f=f)
    d = {a: 0, b: 0, c: 0, n4: 2, n8: 2, g: 2, n9: 3, n12: 3, g3: 4, f: 5}
    return Fixture(net, d, p, ids)


def chunk_down_example() -> Fixture:
    """Five tightly connected gates that gain one buffer by moving down together.

    The chunk grown from ``g0`` is ``{g0, g1, g2, g3, g4}`` with four input
    interfaces (three beneficial) and two output interfaces.
    """
    net = Network()
    x = [net.add_pi(f"x{k}") for k in range(1, 5)]
    a = net.add_maj(Signal(x[0]), ZERO, ONE, "a")
    b = net.add_maj(Signal(x[1]), ZERO, ONE, "b")
    c = net.add_maj(Signal(x[2]), ZERO, ONE, "c")
    dd = net.add_maj(Signal(x[3]), ZERO, ONE, "d")
    g0 = net.add_maj(Signal(a), ZERO, ONE, "g0")
    g4 = net.add_maj(Signal(b), Signal(c), ZERO, "g4")
    g1 = net.add_maj(Signal(g0), Signal(g4), ONE, "g1")
    g3 = net.add_maj(Signal(g4), Signal(dd), ZERO, "g3")
    g2 = net.add_maj(Signal(g1), Signal(g3), ZERO, "g2")
    o0 = net.add_po(Signal(a), "o0")
    o1 = net.add_po(Signal(g0), "o1")
    o2 = net.add_po(Signal(g2), "o2")
    ids = dict(a=a, b=b, c=c, d=dd, g0=g0, g1=g1, g2=g2, g3=g3, g4=g4, o0=o0, o1=o1, o2=o2)
    for k, xi in enumerate(x, 1):
        ids[f"x{k}"] = xi
    depth = {xi: 0 for xi in x}
    depth.update({a: 1, b: 2, c: 2, dd: 3, g0: 4, g4: 4, g1: 6, g3: 6, g2: 7, o0: 9, o1: 9, o2: 9})
    p = TechParams(s_b=2, balance_pi=True, balance_po=True, branch_pi=True)
    return Fixture(net, depth, p, ids)


def chain_example(length: int = 2) -> Network:
    """``PI -> g1 -> ... -> g_length -> PO`` with single fanouts."""
    net = Network()
    s = Signal(net.add_pi("x"))
    for k in range(1, length + 1):
        s = Signal(net.add_maj(s, ZERO, ONE, f"g{k}"))
    net.add_po(s, "f")
    return net


C17_MIG = """\
# ISCAS-85 c17 as a majority-inverter graph (every gate is an AND)
.inputs x1 x2 x3 x6 x7
.outputs o22 o23
n10 = MAJ(x1, x3, 0)
n11 = MAJ(x3, x6, 0)
n16 = MAJ(x2, !n11, 0)
n19 = MAJ(!n11, x7, 0)
n22 = MAJ(!n10, !n16, 0)
n23 = MAJ(!n16, !n19, 0)
o22 = !n22
o23 = !n23
"""
