"""Schedule, then greedily apply chunk moves until no move saves a buffer."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Tuple

from .balance import count_buffers, insert_buffers, verify_mapped
from .chunky import (
    Direction,
    MovePlan,
    apply_move,
    build_chunk,
    is_movable,
    move_benefit,
    plan_move,
    slack_down,
    slack_up,
)
from .core import DepthAssignment, MappedNetwork, Network, TechParams, logic_depth
from .schedule import ScheduleChoice, alap, asap, network_depth

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class OptimizeConfig:
    schedule: ScheduleChoice = ScheduleChoice.BEST
    max_passes: int = 100
    rng_seed: int = 0  # the pipeline is deterministic; kept for interface stability
    full_recount: bool = False  # cross-check every local recount against a full one

    def __post_init__(self) -> None:
        if self.max_passes < 1:
            raise ValueError("max_passes must be >= 1")


@dataclass
class MoveRecord:
    start: int
    members: List[int]
    direction: str
    l: int
    predicted: int
    actual: int


@dataclass
class RunStats:
    gates: int
    depth_unmapped: int
    asap_buffers: int
    alap_buffers: int
    opt_buffers: int
    depth_mapped: int
    chunk_moves_applied: int
    passes: int
    wall_time_ms: float
    moves: List[MoveRecord] = field(default_factory=list)

    @property
    def prediction_hits(self) -> float:
        """Fraction of committed moves whose formula benefit matched the recount."""
        if not self.moves:
            return 1.0
        return sum(m.predicted == m.actual for m in self.moves) / len(self.moves)

    def comparable(self) -> dict:
        """Everything except timing, for determinism checks."""
        out = asdict(self)
        out.pop("wall_time_ms")
        return out


class InternalInvariantError(RuntimeError):
    pass


def _candidates(slack: float) -> List[int]:
    if slack == math.inf:
        return [1]
    s = int(slack)
    return sorted({1, s}) if s >= 1 else []


def best_move(
    net: Network, d: DepthAssignment, p: TechParams, start: int
) -> Optional[Tuple[MovePlan, int]]:
    """The most beneficial move of the chunk around ``start``, or ``None`` if none saves anything."""
    chunk = build_chunk(net, d, p, start)
    best: Optional[Tuple[MovePlan, int]] = None
    down, _ = slack_down(net, d, p, chunk)
    up = slack_up(net, d, p, chunk)
    for direction, slack in ((Direction.DOWN, down), (Direction.UP, up)):
        for l in _candidates(slack):
            gain = move_benefit(net, d, p, chunk, direction.sign * l)
            if gain > 0 and (best is None or gain > best[1]):
                best = (plan_move(net, d, p, chunk, direction, l), gain)
    return best


def improve(
    net: Network, d: DepthAssignment, p: TechParams, max_passes: int = 100, full_recount: bool = False
) -> Tuple[DepthAssignment, List[MoveRecord], int]:
    """Run chunk-move passes from ``d``; returns the final assignment, committed moves and pass count."""
    order = [n for n in net.topological_order() if is_movable(net, n, p)]
    records: List[MoveRecord] = []
    passes = 0
    current = count_buffers(net, d, p) if full_recount else None
    while passes < max_passes:
        passes += 1
        committed = 0
        for n in order:
            found = best_move(net, d, p, n)
            if found is None:
                continue
            plan, _ = found
            d = apply_move(net, d, p, plan)
            if full_recount:
                after = count_buffers(net, d, p)
                if current - after != plan.actual_benefit:
                    raise InternalInvariantError(
                        f"local recount {plan.actual_benefit} != full recount {current - after}"
                    )
                current = after
            if plan.predicted_benefit != plan.actual_benefit:
                log.debug(
                    "benefit formula predicted %d, recount %d (chunk of %d)",
                    plan.predicted_benefit, plan.actual_benefit, n,
                )
            records.append(
                MoveRecord(n, list(plan.chunk.members), plan.direction.value, plan.l,
                           plan.predicted_benefit, plan.actual_benefit)
            )
            committed += 1
        if not committed:
            break
    return d, records, passes


def optimize(
    net: Network, p: TechParams, cfg: OptimizeConfig = OptimizeConfig()
) -> Tuple[DepthAssignment, MappedNetwork, RunStats]:
    """Full pipeline: both schedules, chunk-move improvement, buffer insertion.

    The starting point is chosen by ``cfg.schedule``; with ``BEST`` it is
    whichever initial schedule needs fewer buffers (ASAP on ties).
    """
    t0 = time.perf_counter()
    d_asap = asap(net, p)
    d_alap = alap(net, p, network_depth(net, d_asap))
    n_asap = count_buffers(net, d_asap, p)
    n_alap = count_buffers(net, d_alap, p)
    if cfg.schedule is ScheduleChoice.ASAP:
        d0 = d_asap
    elif cfg.schedule is ScheduleChoice.ALAP:
        d0 = d_alap
    else:
        d0 = d_alap if n_alap < n_asap else d_asap
    d, records, passes = improve(net, dict(d0), p, cfg.max_passes, cfg.full_recount)
    mapped = insert_buffers(net, d, p)
    report = verify_mapped(mapped, p)
    if not report:
        raise InternalInvariantError(f"optimized mapping fails verification: {report.offenders[:3]}")
    stats = RunStats(
        gates=net.num_gates,
        depth_unmapped=logic_depth(net),
        asap_buffers=n_asap,
        alap_buffers=n_alap,
        opt_buffers=mapped.num_buffers,
        depth_mapped=max(mapped.network_depth - 1, 0),
        chunk_moves_applied=len(records),
        passes=passes,
        wall_time_ms=(time.perf_counter() - t0) * 1000.0,
        moves=records,
    )
    return d, mapped, stats
