"""Globally optimal policies for steady-state mean-variance objectives in finite unichain MDPs."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CycleDetected,
    EmptyDomain,
    IdentityViolation,
    InconsistentCertificate,
    InvalidModel,
    MaxIterationsExceeded,
    MvmdpError,
    NotUnichain,
    PolicySpaceTooLarge,
    SegmentLimitExceeded,
    SingularSystem,
)
from .mdp_core import EvaluatedPolicy, Mdp, Mode, RewardBounds, evaluate_policy  # noqa: E402
from .global_opt import (  # noqa: E402
    Algorithm,
    SolveOptions,
    SolveReport,
    brute_force,
    pareto_frontier,
    solve,
    solve_global,
    solve_local,
)
from .inventory import InventoryParams, build_inventory_mdp  # noqa: E402
