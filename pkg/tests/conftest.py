import itertools
import math
import random
from collections import Counter

import pytest
from hypothesis import HealthCheck, settings

from aqfpbuf import GenSpec, TechParams, random_mig

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

FLAG_COMBOS = list(itertools.product([True, False], repeat=3))
ALL_PARAMS = [
    TechParams(s_b=sb, balance_pi=bpi, balance_po=bpo, branch_pi=br)
    for bpi, bpo, br in FLAG_COMBOS
    for sb in (2, 3, 4)
]


def param_id(p: TechParams) -> str:
    flags = "".join(c if v else "-" for c, v in zip("IOB", (p.balance_pi, p.balance_po, p.branch_pi)))
    return f"sb{p.s_b}{flags}m{p.po_phase_modulus}"


def naive_profile(hist, s_b):
    """Straight per-level loop over every level, used as a reference for the fast count."""
    if not hist:
        return 0, 0
    top = max(hist)
    count, edges = 0, hist[top]
    for level in range(top - 1, 0, -1):
        buffers = math.ceil(edges / s_b)
        count += buffers
        edges = buffers + hist.get(level, 0)
    return count, edges


def random_net(seed: int, max_gates: int = 30, max_pis: int = 6, max_pos: int = 5):
    r = random.Random(seed)
    spec = GenSpec(
        n_pis=r.randint(1, max_pis),
        n_gates=r.randint(1, max_gates),
        n_pos=r.randint(1, max_pos),
        max_fanout=r.randint(1, 5),
        seed=seed,
    )
    return random_mig(spec)


@pytest.fixture(params=ALL_PARAMS, ids=param_id)
def params(request):
    return request.param
