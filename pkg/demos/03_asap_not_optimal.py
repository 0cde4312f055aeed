"""ASAP places a gate too early; the optimizer lifts it and saves a buffer."""

from aqfpbuf import OptimizeConfig, ScheduleChoice, brute_force_min, optimize
from aqfpbuf.fixtures import late_gate_example

f = late_gate_example()
d, mapped, stats = optimize(f.net, f.params, OptimizeConfig(schedule=ScheduleChoice.ASAP))
print(f"ASAP {stats.asap_buffers}, ALAP {stats.alap_buffers}, optimized {stats.opt_buffers}")
for m in stats.moves:
    names = [f.net.name(g) for g in m.members]
    print(f"  moved {names} {m.direction} by {m.l} (formula {m.predicted:+d}, recount {m.actual:+d})")
print("exhaustive minimum:", brute_force_min(f.net, f.params)[0])
