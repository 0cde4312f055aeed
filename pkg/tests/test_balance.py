import time
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from aqfpbuf import (
    IllegalDepthAssignment,
    Network,
    Signal,
    TechParams,
    asap,
    build_fanout_trees,
    count_buffers,
    fanout_tree_size,
    insert_buffers,
    strip_buffers,
    tree_profile,
    verify_mapped,
)
from aqfpbuf.core import networks_equal
from aqfpbuf.fixtures import ONE, ZERO, star_tree_example
from conftest import ALL_PARAMS, naive_profile, random_net

histograms = st.dictionaries(st.integers(1, 12), st.integers(1, 6), min_size=1, max_size=6)


@given(histograms, st.integers(2, 5))
def test_fast_profile_matches_per_level_loop(hist, s_b):
    assert tree_profile(hist, s_b) == naive_profile(hist, s_b)


def test_star_tree_has_five_buffers():
    f = star_tree_example()
    assert fanout_tree_size(f.net, f.depth, f.ids["g"], f.params) == 5
    assert tree_profile({2: 1, 5: 3}, 2) == (5, 1)


def test_star_tree_runtime_under_a_millisecond():
    f = star_tree_example()
    g = f.ids["g"]
    fanout_tree_size(f.net, f.depth, g, f.params)
    t0 = time.perf_counter()
    for _ in range(100):
        fanout_tree_size(f.net, f.depth, g, f.params)
    assert (time.perf_counter() - t0) / 100 < 1e-3


@pytest.mark.parametrize(
    "hist, s_b, expected",
    [
        ({1: 1}, 2, (0, 1)),
        ({3: 1}, 3, (2, 1)),
        ({2: 2}, 2, (1, 1)),
        ({2: 3}, 2, (2, 2)),  # two edges would have to leave the owner
        ({3: 4}, 2, (3, 1)),
        ({2: 3}, 3, (1, 1)),
    ],
)
def test_profile_examples(hist, s_b, expected):
    assert tree_profile(hist, s_b) == expected


def test_profile_rejects_nonpositive_depth():
    with pytest.raises(IllegalDepthAssignment):
        tree_profile({0: 1}, 2)


def test_cost_is_not_monotone_in_one_sink():
    # raising one sink can merge it into a shared splitter level
    assert tree_profile({4: 1, 3: 2}, 2)[0] == 4
    assert tree_profile({4: 2, 3: 1}, 2)[0] == 3


@given(histograms, st.integers(2, 4), st.data())
def test_raising_a_sink_keeps_legality(hist, s_b, data):
    if tree_profile(hist, s_b)[1] > 1:
        return
    level = data.draw(st.sampled_from(sorted(hist)))
    raised = Counter(hist)
    raised[level] -= 1
    raised[level + data.draw(st.integers(1, 3))] += 1
    raised = {k: v for k, v in raised.items() if v}
    assert tree_profile(raised, s_b)[1] == 1


@given(histograms, st.integers(2, 4))
def test_lowering_the_owner_adds_one_root_buffer(hist, s_b):
    count, edges = tree_profile(hist, s_b)
    if edges > 1:
        return
    farther = {k + 1: v for k, v in hist.items()}
    assert tree_profile(farther, s_b) == (count + 1, 1)


def test_gate_with_two_fanouts_at_rd1_is_illegal():
    net = Network()
    a = net.add_pi()
    g = net.add_maj(Signal(a), ZERO, ONE)
    o1, o2 = net.add_po(Signal(g)), net.add_po(Signal(g))
    d = {a: 0, g: 1, o1: 2, o2: 2}
    with pytest.raises(IllegalDepthAssignment) as info:
        fanout_tree_size(net, d, g, TechParams())
    assert info.value.node == g
    with pytest.raises(IllegalDepthAssignment):
        insert_buffers(net, d, TechParams())


def test_unbranched_inputs_own_no_tree():
    f = star_tree_example()
    p = f.params.replace(branch_pi=False)
    assert fanout_tree_size(f.net, f.depth, f.ids["g"], p) == 0
    m = insert_buffers(f.net, f.depth, p)
    assert m.num_buffers == 0 and verify_mapped(m, p)


def test_star_tree_structure():
    f = star_tree_example()
    mapped, trees = build_fanout_trees(f.net, f.depth, f.params)
    tree = trees[f.ids["g"]]
    assert tree.size == 5 == mapped.num_buffers
    assert {l: len(b) for l, b in tree.levels.items()} == {1: 1, 2: 1, 3: 1, 4: 2}
    assert verify_mapped(mapped, f.params)
    assert networks_equal(strip_buffers(mapped), f.net)


def test_verify_flags_dangling_and_underfilled_buffers():
    f = star_tree_example()
    mapped = insert_buffers(f.net, f.depth, f.params)
    b = mapped.buffers[0]
    extra = mapped.net.add_buffer(Signal(b))
    mapped.depth[extra] = mapped.depth[b] + 1
    report = verify_mapped(mapped, f.params)
    assert not report.irredundant
    assert extra in {n for n, _ in report.offenders}


def test_verify_flags_unbalanced_edge():
    f = star_tree_example()
    mapped = insert_buffers(f.net, f.depth, f.params)
    top = mapped.buffers[-1]
    mapped.depth[top] -= 1
    assert not verify_mapped(mapped, f.params).path_balanced


def test_verify_flags_overfull_buffer():
    net = Network()
    a = net.add_pi()
    b = net.add_buffer(Signal(a))
    outs = [net.add_po(Signal(b)) for _ in range(3)]
    d = {a: 0, b: 1, **{o: 2 for o in outs}}
    from aqfpbuf import MappedNetwork

    report = verify_mapped(MappedNetwork(net, d), TechParams(s_b=2))
    assert not report.properly_branched


@pytest.mark.parametrize("p", ALL_PARAMS[::5], ids=str)
@given(seed=st.integers(0, 10_000))
def test_mapping_roundtrip_and_decomposition(p, seed):
    net = random_net(seed, max_gates=20)
    d = asap(net, p)
    mapped = insert_buffers(net, d, p)
    assert verify_mapped(mapped, p)
    owners = [n for n in net.nodes() if net.kind(n).value in ("pi", "gate")]
    assert mapped.num_buffers == sum(fanout_tree_size(net, d, n, p) for n in owners)
    assert mapped.num_buffers == count_buffers(net, d, p)
    assert networks_equal(strip_buffers(mapped), net)
