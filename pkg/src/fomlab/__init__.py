"""Laboratory for fully online matching.

Simulates the Ranking algorithm under vertex arrival/deadline event
streams, verifies its randomized dual-fitting analysis empirically and
numerically, and reproduces competitive-ratio bounds and hardness
predictions.
"""

from .charging import (
    B2_CONSTANTS,
    CAPPED,
    EXPONENTIAL,
    PIECEWISE,
    BoundGrid,
    ChargingFunction,
    ChargingKind,
    PiecewiseConstants,
    check_properties,
    f_bipartite,
    f_general,
    minimize_psi1,
    minimize_psi2,
    psi1,
    psi2,
    ratio_bipartite,
    ratio_general,
)
from .dual import (
    DualAssignment,
    FeasibilityReport,
    assign_duals,
    estimate_edge_cover,
    exact_edge_cover,
    find_victim,
    marginal_rank,
    verify_feasibility,
)
from .engine import (
    MatchingOutcome,
    RankAssignment,
    Role,
    Side,
    ranks_from_values,
    run_greedy,
    run_ranking,
    run_ranking_batch,
    run_without,
    sample_ranks,
)
from .errors import FomlabError
from .hardness import (
    AdversaryTreeParams,
    LayeredParams,
    adversary_ratio,
    empirical_ratio,
    fluid_recurrence,
    gen_adversary_tree,
    gen_ranking_hard,
    omega_fixed_point,
)
from .instance import (
    A,
    D,
    Event,
    EventKind,
    Instance,
    build_instance,
    from_one_sided,
    load_instance,
    random_instance,
    save_instance,
)
from .oracle import (
    OracleResult,
    max_matching_bipartite,
    max_matching_bruteforce,
    max_matching_general,
)

__version__ = "0.1.0"

__all__ = [
    "A",
    "AdversaryTreeParams",
    "B2_CONSTANTS",
    "BoundGrid",
    "CAPPED",
    "ChargingFunction",
    "ChargingKind",
    "D",
    "DualAssignment",
    "EXPONENTIAL",
    "Event",
    "EventKind",
    "FeasibilityReport",
    "FomlabError",
    "Instance",
    "LayeredParams",
    "MatchingOutcome",
    "OracleResult",
    "PIECEWISE",
    "PiecewiseConstants",
    "RankAssignment",
    "Role",
    "Side",
    "adversary_ratio",
    "assign_duals",
    "build_instance",
    "check_properties",
    "empirical_ratio",
    "estimate_edge_cover",
    "exact_edge_cover",
    "f_bipartite",
    "f_general",
    "find_victim",
    "fluid_recurrence",
    "from_one_sided",
    "gen_adversary_tree",
    "gen_ranking_hard",
    "load_instance",
    "marginal_rank",
    "max_matching_bipartite",
    "max_matching_bruteforce",
    "max_matching_general",
    "minimize_psi1",
    "minimize_psi2",
    "omega_fixed_point",
    "psi1",
    "psi2",
    "random_instance",
    "ranks_from_values",
    "ratio_bipartite",
    "ratio_general",
    "run_greedy",
    "run_ranking",
    "run_ranking_batch",
    "run_without",
    "sample_ranks",
    "save_instance",
    "verify_feasibility",
]
