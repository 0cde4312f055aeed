"""Count and build the fanout tree of one input feeding four outputs."""

from aqfpbuf import fanout_tree_size, verify_mapped
from aqfpbuf.balance import build_fanout_trees
from aqfpbuf.fixtures import star_tree_example

f = star_tree_example()
g = f.ids["g"]
print("relative depths:", sorted(f.depth[o] - f.depth[g] for o in f.net.pos))
print("buffers needed with s_b=2:", fanout_tree_size(f.net, f.depth, g, f.params))

mapped, trees = build_fanout_trees(f.net, f.depth, f.params)
for level, bufs in sorted(trees[g].levels.items()):
    print(f"  level {level}: {len(bufs)} buffer(s)")

print("mapped network verifies:", bool(verify_mapped(mapped, f.params)))
