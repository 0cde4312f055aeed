"""Command-line front end: ``aqfpbuf {map,sweep,verify,oracle,gen}``.

Exit codes: 0 success, 1 input or verification error, 2 usage error,
3 oracle budget refusal.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from .balance import count_buffers, verify_mapped
from .core import Network, TechParams, logic_depth
from .ingest import MigParseError, export_dot, parse_mig, read_mapped, write_mapped, write_mig
from .optimizer import OptimizeConfig, optimize
from .oracle import DEFAULT_BUDGET, GenSpec, OracleBudgetExceeded, brute_force_min, random_mig
from .schedule import ScheduleChoice, asap, network_depth

EXIT_OK, EXIT_INPUT, EXIT_USAGE, EXIT_REFUSED = 0, 1, 2, 3

BALANCE_GRID = [(True, True), (True, False), (False, True), (False, False)]
BRANCH_GRID = [(branch, sb) for branch in (True, False) for sb in (2, 3, 4)]


class InputError(Exception):
    pass


def _emit(records: Sequence[dict], out: Optional[str]) -> None:
    text = "".join(json.dumps(r, sort_keys=False) + "\n" for r in records)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load(path: str) -> Network:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return parse_mig(text)
    except MigParseError as exc:
        raise InputError(f"{path}:{exc}") from None


def _params(args: argparse.Namespace, parser: argparse.ArgumentParser) -> TechParams:
    try:
        p = TechParams(
            s_b=args.sb,
            branch_pi=args.branch_pi,
            balance_pi=args.balance_pi,
            balance_po=args.balance_po,
            po_phase_modulus=args.po_mod,
        )
    except ValueError as exc:
        parser.error(str(exc))
    if not p.branch_pi and p.balance_pi:
        print(
            "note: unbranched but balanced inputs are interpreted as pinned at depth 0 "
            "with unbuffered edges",
            file=sys.stderr,
        )
    return p


def _config(args: argparse.Namespace) -> OptimizeConfig:
    return OptimizeConfig(
        schedule=ScheduleChoice(args.schedule), max_passes=args.max_passes, rng_seed=args.seed
    )


def run_record(name: str, net: Network, p: TechParams, cfg: OptimizeConfig):
    """One JSON-lines stats record, plus the optimized depths and mapped network."""
    d, mapped, st = optimize(net, p, cfg)
    record = {
        "benchmark": name,
        "n_gates": net.num_gates,
        "n_pis": len(net.pis),
        "n_pos": len(net.pos),
        "depth_unmapped": logic_depth(net),
        "params": p.as_dict(),
        "asap": st.asap_buffers,
        "alap": st.alap_buffers,
        "opt": st.opt_buffers,
        "depth_mapped": st.depth_mapped,
        "chunk_moves": st.chunk_moves_applied,
        "passes": st.passes,
        "time_ms": round(st.wall_time_ms, 3),
    }
    return record, d, mapped


# -- map ---------------------------------------------------------------------------------


def cmd_map(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    p = _params(args, parser)
    net = _load(args.input)
    record, _, mapped = run_record(Path(args.input).stem, net, p, _config(args))
    if args.dot:
        Path(args.dot).write_text(export_dot(mapped, Path(args.input).stem))
    if args.mapped:
        Path(args.mapped).write_text(write_mapped(mapped))
    _emit([record], args.out)
    return EXIT_OK


# -- sweep -----------------------------------------------------------------------------------


def _grid_cells(grid: str):
    cells = []
    if grid in ("balance", "both"):
        for bpi, bpo in BALANCE_GRID:
            cells.append(("balance", TechParams(s_b=3, branch_pi=True, balance_pi=bpi, balance_po=bpo)))
    if grid in ("branch", "both"):
        for branch, sb in BRANCH_GRID:
            cells.append(("branch", TechParams(s_b=sb, branch_pi=branch, balance_pi=False, balance_po=False)))
    return cells


def _sweep_one(path: str, grid: str, cfg: OptimizeConfig) -> dict:
    try:
        net = _load(path)
    except InputError as exc:
        return {"path": path, "error": str(exc)}
    name = Path(path).stem
    cells, audits = [], []
    for kind, p in _grid_cells(grid):
        record, d, _ = run_record(name, net, p, cfg)
        record["grid"] = kind
        cells.append(record)
        if kind == "branch" and p.s_b == 2:
            counts = [count_buffers(net, d, p.replace(s_b=sb)) for sb in (2, 3, 4)]
            audits.append({
                "row": "Monotonicity",
                "benchmark": name,
                "branch_pi": p.branch_pi,
                "depths_from": "sb=2",
                "counts": counts,
                "ok": counts[0] >= counts[1] >= counts[2],
            })
    return {"path": path, "cells": cells, "audits": audits}


def _workers(n_jobs: int) -> int:
    raw = os.environ.get("AQFP_THREADS")
    cap = os.cpu_count() or 1
    if raw:
        try:
            cap = max(1, int(raw))
        except ValueError:
            pass
    return max(1, min(cap, n_jobs))


def _aggregate(cells: List[dict]) -> List[dict]:
    rows = []
    for grid, baseline in (("balance", {"balance_pi": True, "balance_po": True}),
                           ("branch", {"branch_pi": True, "sb": 3})):
        mine = [c for c in cells if c["grid"] == grid]
        if not mine:
            continue
        keys = []
        for c in mine:
            k = json.dumps(c["params"], sort_keys=True)
            if k not in keys:
                keys.append(k)
        totals = {}
        for k in keys:
            group = [c for c in mine if json.dumps(c["params"], sort_keys=True) == k]
            totals[k] = {col: sum(c[col] for c in group) for col in ("asap", "alap", "opt")}
            rows.append({"row": "Total", "grid": grid, "params": json.loads(k), **totals[k]})
        for k in keys:
            t = totals[k]
            pct = lambda v: round(100.0 * (t["asap"] - v) / t["asap"], 2) if t["asap"] else 0.0
            rows.append({"row": "Improv.", "grid": grid, "params": json.loads(k),
                         "alap_pct": pct(t["alap"]), "opt_pct": pct(t["opt"])})
        base_key = next(
            (k for k in keys if all(json.loads(k)[f] == v for f, v in baseline.items())), None
        )
        if base_key is None:
            continue
        base = totals[base_key]
        for k in keys:
            t = totals[k]
            ratio = {col: (round(t[col] / base[col], 4) if base[col] else None)
                     for col in ("asap", "alap", "opt")}
            rows.append({"row": "Ratio", "grid": grid, "params": json.loads(k),
                         "baseline": json.loads(base_key), **ratio})
    return rows


def cmd_sweep(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    root = Path(args.input)
    if not root.is_dir():
        print(f"error: {root} is not a directory", file=sys.stderr)
        return EXIT_INPUT
    files = sorted(str(f) for f in root.glob("*.mig"))
    if not files:
        print(f"error: no .mig files in {root}", file=sys.stderr)
        return EXIT_INPUT
    cfg = _config(args)
    workers = _workers(len(files))
    if workers == 1:
        results = [_sweep_one(f, args.grid, cfg) for f in files]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_one, files, [args.grid] * len(files), [cfg] * len(files)))
    cells, audits, failed = [], [], 0
    for res in results:
        if "error" in res:
            failed += 1
            print(f"error: {res['error']}", file=sys.stderr)
            continue
        cells.extend(res["cells"])
        audits.extend(res["audits"])
    _emit(cells + _aggregate(cells) + audits, args.out)
    if failed or not all(a["ok"] for a in audits):
        return EXIT_INPUT
    return EXIT_OK


# -- verify / oracle / gen ------------------------------------------------------------------------


def cmd_verify(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    p = _params(args, parser)
    try:
        text = Path(args.input).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {args.input}: {exc.strerror}") from None
    try:
        mapped = read_mapped(text)
    except MigParseError as exc:
        raise InputError(f"{args.input}:{exc}") from None
    report = verify_mapped(mapped, p)
    names = {n: mapped.net.name(n) for n in mapped.net.nodes() if mapped.net.name(n)}
    out = {"input": args.input, "ok": report.ok, "buffers": mapped.num_buffers, **report.as_dict(names)}
    _emit([out], args.out)
    if not report.ok:
        for node, what in report.offenders:
            print(f"offender {names.get(node, node)}: {what}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    p = _params(args, parser)
    net = _load(args.input)
    record, _, mapped = run_record(Path(args.input).stem, net, p, _config(args))
    cap = args.depth_cap
    if cap is None:
        cap = max(network_depth(net, asap(net, p)) + 5, mapped.network_depth)
    try:
        best, witness = brute_force_min(net, p, cap, budget=args.budget)
    except OracleBudgetExceeded as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    names = {n: (net.name(n) or str(n)) for n in witness}
    out = {
        "benchmark": record["benchmark"],
        "params": p.as_dict(),
        "depth_cap": cap,
        "min": best,
        "opt": record["opt"],
        "gap": record["opt"] - best,
        "witness": {names[n]: v for n, v in sorted(witness.items())},
    }
    _emit([out], args.out)
    return EXIT_OK


def cmd_gen(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    try:
        spec = GenSpec(args.pis, args.gates, args.pos, args.max_fanout, args.seed)
    except ValueError as exc:
        parser.error(str(exc))
    text = write_mig(random_mig(spec))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- parser ------------------------------------------------------------------------------------


def _tech_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--sb", type=int, default=3, help="buffer splitting capacity (>= 2)")
    sp.add_argument("--balance-pi", action=argparse.BooleanOptionalAction, default=True)
    sp.add_argument("--balance-po", action=argparse.BooleanOptionalAction, default=True)
    sp.add_argument("--branch-pi", action=argparse.BooleanOptionalAction, default=True)
    sp.add_argument("--po-mod", type=int, default=1, help="output depths must be multiples of this")


def _run_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--schedule", choices=[c.value for c in ScheduleChoice], default="best")
    sp.add_argument("--max-passes", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", help="write JSON lines here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aqfpbuf", description="Buffer and splitter insertion for AQFP majority networks."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("map", help="optimize one network and print its stats record")
    sp.add_argument("input")
    _tech_flags(sp)
    _run_flags(sp)
    sp.add_argument("--dot", help="write a leveled DOT drawing of the mapped network")
    sp.add_argument("--mapped", help="write the mapped-network dump")
    sp.set_defaults(func=cmd_map)

    sp = sub.add_parser("sweep", help="run the assumption grids over a directory of .mig files")
    sp.add_argument("input")
    sp.add_argument("--grid", choices=["balance", "branch", "both"], default="both")
    _run_flags(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("verify", help="check a mapped-network dump")
    sp.add_argument("input")
    _tech_flags(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("oracle", help="exhaustive minimum for a tiny network")
    sp.add_argument("input")
    _tech_flags(sp)
    _run_flags(sp)
    sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    sp.add_argument("--depth-cap", type=int)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("gen", help="write a random .mig network")
    sp.add_argument("--pis", type=int, default=4)
    sp.add_argument("--gates", type=int, default=10)
    sp.add_argument("--pos", type=int, default=2)
    sp.add_argument("--max-fanout", type=int, default=4)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_gen)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "max_passes", 1) < 1:
        parser.error("--max-passes must be >= 1")
    try:
        return args.func(args, parser)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
