"""End-to-end acceptance criteria, one test per item, each printing a PASS/FAIL line."""

import json
import shutil
import statistics
import time
from pathlib import Path

import pytest

from aqfpbuf import (
    OptimizeConfig,
    ScheduleChoice,
    alap,
    asap,
    brute_force_min,
    count_buffers,
    fanout_tree_size,
    insert_buffers,
    optimize,
    parse_mig,
    strip_buffers,
    verify_mapped,
    write_mig,
)
from aqfpbuf.balance import owns_tree
from aqfpbuf.chunky import Direction, apply_move, build_chunk, classify_bii, plan_move, slack_down
from aqfpbuf.cli import main
from aqfpbuf.core import structurally_equal
from aqfpbuf.fixtures import chunk_down_example, late_gate_example, star_tree_example
from aqfpbuf.schedule import network_depth
from conftest import ALL_PARAMS, random_net

pytestmark = pytest.mark.acceptance

N_NETS = 200


def report(capsys, item, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {item}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def median_ms(fn, repeat=21):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return statistics.median(times) * 1000


@pytest.fixture(scope="module")
def corpus():
    """Every (net, params, start schedule) case, mapped and verified; built once and timed."""
    t0 = time.perf_counter()
    nets = [random_net(seed) for seed in range(N_NETS)]
    cases, failures = [], []
    for seed, net in enumerate(nets):
        for p in ALL_PARAMS:
            d_asap = asap(net, p)
            for kind, d in (("asap", d_asap), ("alap", alap(net, p, network_depth(net, d_asap)))):
                m = insert_buffers(net, d, p)
                verdict = verify_mapped(m, p)
                if not verdict:
                    failures.append((seed, p, kind, verdict.offenders[:2]))
                cases.append((seed, net, p, kind, d, m))
    return nets, cases, failures, time.perf_counter() - t0


def test_1_star_tree_is_five_buffers(capsys):
    f = star_tree_example()
    size = fanout_tree_size(f.net, f.depth, f.ids["g"], f.params)
    ms = median_ms(lambda: fanout_tree_size(f.net, f.depth, f.ids["g"], f.params))
    report(capsys, 1, size == 5 and ms < 1.0, f"tree size {size} (want 5), {ms:.4f} ms (< 1)")


def test_2_chunk_down_move(capsys):
    f = chunk_down_example()
    net, d, p, ids = f

    def run():
        chunk = build_chunk(net, d, p, ids["g0"])
        slack, _ = slack_down(net, d, p, chunk)
        plan = plan_move(net, d, p, chunk, Direction.DOWN, 1)
        moved = apply_move(net, d, p, plan)
        return chunk, slack, plan, moved

    chunk, slack, plan, moved = run()
    ms = median_ms(run)
    saved = count_buffers(net, d, p) - count_buffers(net, moved, p)
    members = {net.name(g) for g in chunk.members}
    n_bii = sum(classify_bii(net, d, i) for i in chunk.iis)
    ok = (
        members == {"g0", "g1", "g2", "g3", "g4"}
        and len(chunk.iis) == 4
        and n_bii == 3
        and len(chunk.ois) == 2
        and slack == 1
        and saved == 1
        and ms < 10.0
    )
    report(
        capsys, 2, ok,
        f"chunk {sorted(members)}, {len(chunk.iis)} IIs ({n_bii} beneficial), {len(chunk.ois)} OIs, "
        f"slack_down {slack}, full recount saves {saved}, {ms:.3f} ms (< 10)",
    )


def test_3_asap_is_not_optimal(capsys):
    f = late_gate_example()
    cfg = OptimizeConfig(schedule=ScheduleChoice.ASAP)
    d, _, stats = optimize(f.net, f.params, cfg)
    ms = median_ms(lambda: optimize(f.net, f.params, cfg))
    g = f.ids["g"]
    moved_g_up = any(
        m.direction == "up" and g in m.members for m in stats.moves
    ) and d[g] > f.depth[g]
    ok = moved_g_up and stats.opt_buffers == stats.asap_buffers - 1 and ms < 10.0
    report(
        capsys, 3, ok,
        f"ASAP {stats.asap_buffers} -> {stats.opt_buffers}, g lifted {d[g] - f.depth[g]} level(s), {ms:.3f} ms (< 10)",
    )


def test_4_sweep_layout_substitutes_table_numbers(tmp_path, capsys):
    # no numeric target exists for the benchmark tables; check the layout and ASAP determinism
    src = Path(__file__).parent / "data" / "c17.mig"
    shutil.copy(src, tmp_path / "c17.mig")
    runs = []
    for _ in range(2):
        assert main(["sweep", str(tmp_path), "--out", str(tmp_path / "out.jsonl")]) == 0
        runs.append([json.loads(x) for x in (tmp_path / "out.jsonl").read_text().splitlines()])
    rows = {r.get("row") for r in runs[0]}
    asap_cols = [[r["asap"] for r in run if "row" not in r] for run in runs]
    ok = {"Total", "Improv.", "Ratio"} <= rows and asap_cols[0] == asap_cols[1] and len(asap_cols[0]) == 10
    report(
        capsys, 4, ok,
        "tables not reproducible as numbers (inputs not shipped); "
        f"sweep emits Total/Improv./Ratio rows and a deterministic ASAP column over {len(asap_cols[0])} cells",
    )


def test_5_every_mapping_verifies(corpus, capsys):
    _, cases, failures, seconds = corpus
    report(
        capsys, 5, not failures and seconds < 60.0,
        f"{len(cases)} cases ({N_NETS} nets x 24 params x 2 schedules), "
        f"{len(failures)} verification failures, {seconds:.1f} s (< 60)",
    )


def test_6_buffer_count_decomposes_over_trees(corpus, capsys):
    _, cases, _, _ = corpus
    bad = 0
    for _, net, p, _, d, m in cases:
        total = sum(fanout_tree_size(net, d, n, p) for n in net.nodes() if owns_tree(net, n, p))
        bad += total != m.num_buffers
    report(capsys, 6, bad == 0, f"{bad} mismatches between inserted buffers and summed tree sizes over {len(cases)} cases")


def test_7_oracle_dominance(capsys):
    t0 = time.perf_counter()
    violations, gaps = [], []
    for seed in range(N_NETS):
        net = random_net(seed, max_gates=7, max_pis=4, max_pos=3)
        p = ALL_PARAMS[seed % len(ALL_PARAMS)]
        _, mapped, stats = optimize(net, p)
        cap = max(network_depth(net, asap(net, p)) + 5, mapped.network_depth)
        best, _ = brute_force_min(net, p, cap)
        if not best <= stats.opt_buffers <= min(stats.asap_buffers, stats.alap_buffers):
            violations.append((seed, best, stats.opt_buffers, stats.asap_buffers, stats.alap_buffers))
        gaps.append(stats.opt_buffers - best)
    seconds = time.perf_counter() - t0
    report(
        capsys, 7, not violations and seconds < 300.0,
        f"{len(violations)} violations over {N_NETS} nets, mean gap {statistics.mean(gaps):.3f} "
        f"(max {max(gaps)}, {sum(g == 0 for g in gaps)} exact), {seconds:.1f} s (< 300)",
    )


def test_8_fixed_depth_monotonicity(corpus, capsys):
    _, cases, _, _ = corpus
    bad = []
    for seed, net, p, kind, d, _ in cases:
        base = count_buffers(net, d, p)
        prev = base
        for sb in range(p.s_b + 1, 5):
            cur = count_buffers(net, d, p.replace(s_b=sb))
            if cur > prev:
                bad.append((seed, p, kind, "s_b", sb))
            prev = cur
        if p.branch_pi and count_buffers(net, d, p.replace(branch_pi=False)) > base:
            bad.append((seed, p, kind, "branch_pi"))
    report(capsys, 8, not bad, f"{len(bad)} monotonicity violations over {len(cases)} net/depth pairs")


def test_9_determinism_and_never_worse(capsys):
    bad = []
    for seed in range(N_NETS):
        net = random_net(seed)
        p = ALL_PARAMS[seed % len(ALL_PARAMS)]
        _, _, a = optimize(net, p)
        _, _, b = optimize(net, p)
        if a.comparable() != b.comparable():
            bad.append((seed, "nondeterministic"))
        if a.opt_buffers > min(a.asap_buffers, a.alap_buffers):
            bad.append((seed, "worse than start"))
    report(capsys, 9, not bad, f"{len(bad)} violations over {N_NETS} nets optimized twice")


def test_10_round_trips(corpus, capsys):
    nets, cases, _, _ = corpus
    text_bad = sum(not structurally_equal(net, parse_mig(write_mig(net))) for net in nets)
    strip_bad = sum(not structurally_equal(strip_buffers(m), net) for _, net, _, _, _, m in cases)
    report(
        capsys, 10, text_bad == 0 and strip_bad == 0,
        f"{text_bad} text round-trip failures over {len(nets)} nets, "
        f"{strip_bad} strip/insert failures over {len(cases)} cases",
    )
