"""Solvers for sequential competitive facility location under
multinomial-logit demand: an exact branch-and-cut with submodular and
bulge cuts, a constant-ratio approximation, and an enumeration oracle,
exposed as a library, an HTTP service, and a CLI workbench."""

__version__ = "0.1.0"

from .approx import ApproxReport, ratio_constants, solve_approx, surrogate_value
from .bnc import NodeState, SolveReport, SolverConfig, solve_exact
from .cuts import (
    CutFamily,
    CutRow,
    bulge_cut,
    leader_share_sets,
    select_submodular_anchor,
    soc_certificate_check,
    submodular_cut,
    surrogate_s_cut,
    surrogate_t_cut,
)
from .lp import LpProblem, LpSolution, LpStatus, solve_lp
from .model import (
    DomainError,
    FollowerSolution,
    Instance,
    LeaderSolution,
    bulge_gradient,
    bulge_value,
    follower_share,
    leader_share_max,
    leader_share_plus,
)
from .oracle import EnumerationResult, OracleBudgetError, solve_enumeration
from .separation import (
    SeparationBudgetError,
    SeparationMode,
    SeparationResult,
    approx_separation,
    exact_best_response,
    hybrid_separation,
)

__all__ = [
    "__version__",
    "ApproxReport",
    "ratio_constants",
    "solve_approx",
    "surrogate_value",
    "NodeState",
    "SolveReport",
    "SolverConfig",
    "solve_exact",
    "CutFamily",
    "CutRow",
    "bulge_cut",
    "leader_share_sets",
    "select_submodular_anchor",
    "soc_certificate_check",
    "submodular_cut",
    "surrogate_s_cut",
    "surrogate_t_cut",
    "LpProblem",
    "LpSolution",
    "LpStatus",
    "solve_lp",
    "DomainError",
    "FollowerSolution",
    "Instance",
    "LeaderSolution",
    "bulge_gradient",
    "bulge_value",
    "follower_share",
    "leader_share_max",
    "leader_share_plus",
    "EnumerationResult",
    "OracleBudgetError",
    "solve_enumeration",
    "SeparationBudgetError",
    "SeparationMode",
    "SeparationResult",
    "approx_separation",
    "exact_best_response",
    "hybrid_separation",
]
