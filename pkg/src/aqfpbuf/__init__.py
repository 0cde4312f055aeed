"""Buffer and splitter insertion with depth optimization for AQFP majority networks."""

from .balance import (
    FanoutTree,
    VerifyReport,
    build_fanout_trees,
    count_buffers,
    fanout_tree_size,
    insert_buffers,
    strip_buffers,
    tree_profile,
    verify_mapped,
)
from .chunky import (
    Chunk,
    Direction,
    Interface,
    InterfaceKind,
    MovePlan,
    apply_move,
    are_close,
    build_chunk,
    classify_bii,
    predicted_benefit,
    slack_down,
    slack_up,
)
from .core import (
    CONST0,
    DepthAssignment,
    IllegalDepthAssignment,
    MappedNetwork,
    Network,
    NetworkError,
    NodeId,
    NodeKind,
    Signal,
    TechParams,
    fanout_histogram,
    fanouts,
    logic_depth,
    relative_depth,
    structurally_equal,
)
from .ingest import MigParseError, export_dot, parse_mig, read_mapped, write_mapped, write_mig
from .optimizer import OptimizeConfig, RunStats, optimize
from .oracle import GenSpec, OracleBudgetExceeded, brute_force_min, random_mig
from .schedule import (
    InfeasibleBound,
    Legality,
    ScheduleChoice,
    alap,
    asap,
    is_legal,
    reserved_levels,
    initial_schedule,
)

__version__ = "0.1.0"
