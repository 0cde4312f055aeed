"""Parse a .mig file, optimize it, and write the mapped dump and a DOT drawing."""

import json
import sys
import tempfile
from pathlib import Path

from aqfpbuf import TechParams, export_dot, optimize, parse_mig, write_mapped

src = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent / "data" / "c17.mig"
net = parse_mig(src.read_text())
out = Path(tempfile.mkdtemp(prefix="aqfpbuf-"))
for sb in (2, 3, 4):
    _, mapped, stats = optimize(net, TechParams(s_b=sb))
    print(f"s_b={sb}: asap {stats.asap_buffers} alap {stats.alap_buffers} opt {stats.opt_buffers} "
          f"depth {stats.depth_mapped} moves {stats.chunk_moves_applied}")
    (out / f"{src.stem}_sb{sb}.map").write_text(write_mapped(mapped))
    (out / f"{src.stem}_sb{sb}.dot").write_text(export_dot(mapped, src.stem))
print("wrote", ", ".join(sorted(p.name for p in out.iterdir())), "to", out)
print(json.dumps(stats.comparable()["moves"][:2]))
