import math

import pytest
from hypothesis import given, strategies as st

from aqfpbuf import (
    CONST0,
    IllegalDepthAssignment,
    Network,
    NetworkError,
    NodeKind,
    Signal,
    TechParams,
    fanout_histogram,
    fanouts,
    insert_buffers,
    logic_depth,
    relative_depth,
    structurally_equal,
)
from aqfpbuf.core import fanins, networks_equal
from aqfpbuf.fixtures import ONE, ZERO, chain_example, star_tree_example
from conftest import random_net


def test_techparams_validation():
    assert TechParams().s_g == 1
    assert TechParams(branch_pi=False).s_i == math.inf
    assert TechParams(branch_pi=True).s_i == 1
    with pytest.raises(ValueError):
        TechParams(s_b=1)
    with pytest.raises(ValueError):
        TechParams(po_phase_modulus=0)
    assert TechParams(balance_po=False).pos_movable
    assert not TechParams(balance_po=False, po_phase_modulus=4).pos_movable


def test_node_kinds_and_arity():
    net = Network()
    a = net.add_pi("a")
    g = net.add_maj(Signal(a), ZERO, ONE)
    o = net.add_po(Signal(g))
    assert net.kind(CONST0) is NodeKind.CONST
    assert (net.kind(a), net.kind(g), net.kind(o)) == (NodeKind.PI, NodeKind.GATE, NodeKind.PO)
    with pytest.raises(NetworkError):
        net.add_po(ZERO)
    with pytest.raises(KeyError):
        net.fanins(99)


def test_fanouts_look_through_buffers():
    net = Network()
    a = net.add_pi()
    g = net.add_maj(Signal(a), ZERO, ONE)
    b = net.add_buffer(Signal(g))
    x = net.add_maj(Signal(b), ZERO, ONE)
    y = net.add_maj(Signal(b), ONE, ZERO)
    assert fanouts(net, g) == {x, y}
    assert fanouts(net, x) == set()
    assert fanins(net, x) == {g, CONST0}


def test_star_fanouts_and_histogram():
    f = star_tree_example()
    g = f.ids["g"]
    assert fanouts(f.net, g) == {f.ids[f"o{k}"] for k in range(4)}
    assert fanout_histogram(f.net, f.depth, g) == {2: 1, 5: 3}
    assert relative_depth(f.net, f.depth, g, f.ids["o1"]) == 5
    mapped = insert_buffers(f.net, f.depth, f.params)
    assert fanouts(mapped.net, g) == fanouts(f.net, g)
    assert fanout_histogram(mapped.net, mapped.depth, g) == {2: 1, 5: 3}


def test_relative_depth_contract():
    net = chain_example(2)
    d = {1: 0, 2: 3, 3: 5, 4: 6}
    assert relative_depth(net, d, 2, 3) == 2
    with pytest.raises(NetworkError):
        relative_depth(net, d, 2, 4)


def test_histogram_counts():
    net = Network()
    a = net.add_pi()
    g = net.add_maj(Signal(a), ZERO, ONE)
    sinks = [net.add_po(Signal(g)) for _ in range(3)]
    d = {a: 0, g: 0, sinks[0]: 3, sinks[1]: 3, sinks[2]: 4}
    assert fanout_histogram(net, d, g) == {3: 2, 4: 1}


def test_topological_order_and_cycles():
    net = chain_example(3)
    order = net.topological_order()
    pos = {n: i for i, n in enumerate(order)}
    for n in net.nodes():
        for s in net.fanins(n):
            assert pos[s.node] < pos[n]
    g1 = net.gates()[0]
    net.set_fanin(g1, 1, Signal(net.gates()[-1]))
    with pytest.raises(NetworkError):
        net.topological_order()


def test_logic_depth():
    assert logic_depth(chain_example(4)) == 4


def test_kill_keeps_ids_stable():
    net = chain_example(1)
    b = net.add_buffer(Signal(net.pis[0]))
    before = list(net.nodes())
    net.kill(b)
    assert b not in net
    assert list(net.nodes()) == [n for n in before if n != b]
    assert net.add_pi() == b + 1


@given(st.integers(0, 10_000))
def test_fanin_fanout_consistency(seed):
    net = random_net(seed)
    for n in net.nodes():
        for s in net.fanins(n):
            assert n in {sink for sink, _ in net.fanout_edges(s.node)}
        for sink, slot in net.fanout_edges(n):
            assert net.fanins(sink)[slot].node == n


@given(st.integers(0, 10_000))
def test_copy_is_equal_and_independent(seed):
    net = random_net(seed)
    dup = net.copy()
    assert networks_equal(net, dup) and structurally_equal(net, dup)
    g = dup.gates()[0]
    dup.set_fanin(g, 0, ~dup.fanins(g)[0])
    assert not networks_equal(net, dup)


@given(st.integers(0, 10_000))
def test_complement_flags_never_change_counts(seed):
    from aqfpbuf import asap, count_buffers

    net = random_net(seed, max_gates=15)
    flipped = net.copy()
    for n in list(flipped.nodes()):
        for slot, s in enumerate(flipped.fanins(n)):
            flipped.set_fanin(n, slot, ~s)
    p = TechParams(s_b=2)
    d = asap(net, p)
    assert d == asap(flipped, p)
    assert count_buffers(net, d, p) == count_buffers(flipped, d, p)


def test_illegal_depth_exception_carries_node():
    err = IllegalDepthAssignment("x", node=7)
    assert err.node == 7
