"""The auxiliary average-cost problem obtained by fixing the pseudo mean ``y``."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .avg_solver import SolverResult, policy_iteration
from .errors import IdentityViolation
from .mdp_core import EvaluatedPolicy, Mdp, Mode, Policy, evaluate_policy, objective_weights

IDENTITY_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class AuxiliarySolution:
    """Optimal policy of the auxiliary problem at ``y``, re-evaluated under the real objective."""

    y: float
    policy: Policy
    pseudo_objective: float
    evaluated: EvaluatedPolicy
    solver: SolverResult

    @property
    def mean(self) -> float:
        return self.evaluated.mean

    @property
    def variance(self) -> float:
        return self.evaluated.variance

    @property
    def objective(self) -> float:
        return self.evaluated.objective


def pseudo_cost(mdp: Mdp, y: float, mode: Mode = Mode.MEAN_VARIANCE) -> np.ndarray:
    """Per-step cost ``w_var (r - y)^2 - w_mean r``; ``w_var = beta`` in mean-variance mode."""
    w_var, w_mean = objective_weights(mdp, mode)
    r = mdp.rewards
    return w_var * (r - y) ** 2 - w_mean * r


def solve_auxiliary(mdp: Mdp, y: float, warm_start: Optional[Sequence[int]] = None,
                    mode: Mode = Mode.MEAN_VARIANCE) -> AuxiliarySolution:
    y = float(y)
    res = policy_iteration(mdp, pseudo_cost(mdp, y, mode), initial=warm_start)
    ev = evaluate_policy(mdp, res.policy, mode)
    w_var, _ = objective_weights(mdp, mode)
    expected = ev.pseudo_objective(y, w_var)
    scale = max(1.0, abs(res.average))
    if abs(res.average - expected) > IDENTITY_TOL * scale:
        raise IdentityViolation(
            f"pseudo objective {res.average!r} != {expected!r} for policy {res.policy} at y={y!r}"
        )
    return AuxiliarySolution(y, res.policy, res.average, ev, res)
