"""Grow a chunk of tightly coupled gates and move it down one level."""

from aqfpbuf import count_buffers
from aqfpbuf.chunky import Direction, apply_move, build_chunk, classify_bii, plan_move, slack_down
from aqfpbuf.fixtures import chunk_down_example

net, d, p, ids = chunk_down_example()
name = net.name
chunk = build_chunk(net, d, p, ids["g0"])
print("members:", sorted(name(g) for g in chunk.members))
for t in chunk.iis:
    tag = "beneficial" if classify_bii(net, d, t) else "plain"
    print(f"  input interface {name(t.g_c)} <- {name(t.g_f)} ({tag})")
for t in chunk.ois:
    print(f"  output interface {name(t.g_c)} -> {name(t.g_f)}")

slack, _ = slack_down(net, d, p, chunk)
plan = plan_move(net, d, p, chunk, Direction.DOWN, 1)
moved = apply_move(net, d, p, plan)
print(f"slack down: {slack}, predicted gain {plan.predicted_benefit}, recount gain {plan.actual_benefit}")
print("buffers:", count_buffers(net, d, p), "->", count_buffers(net, moved, p))
