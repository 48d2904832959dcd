"""Average-cost policy iteration built on the ``(I - P + e e^T)`` Poisson solve."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import CycleDetected, InvalidModel, SingularSystem
from .mdp_core import Mdp, Policy, _fundamental

IMPROVE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PotentialVector:
    """Potentials ``g`` of policy ``d`` under a cost table; ``sum(g)`` is the average cost."""

    g: np.ndarray
    cost: np.ndarray
    policy: Policy

    @property
    def average(self) -> float:
        return float(self.g.sum())


@dataclass(frozen=True, eq=False)
class SolverResult:
    policy: Policy
    average: float
    potentials: PotentialVector
    iterations: int
    history: tuple[float, ...] = field(default=())


def _check_cost(mdp: Mdp, cost) -> np.ndarray:
    cost = np.asarray(cost, dtype=float)
    if cost.shape != mdp.rewards.shape:
        raise InvalidModel(f"cost table has shape {cost.shape}, expected {mdp.rewards.shape}")
    return cost


def potentials(mdp: Mdp, d: Sequence[int], cost) -> PotentialVector:
    """Solve ``(I - P^d + e e^T) g = c^d``."""
    d = tuple(d)
    cost = _check_cost(mdp, cost)
    rows = np.arange(mdp.n_states)
    c = cost[rows, list(d)]
    try:
        g = np.linalg.solve(_fundamental(mdp.transition_matrix(d)), c)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from None
    if not np.all(np.isfinite(g)):
        raise SingularSystem(f"potential solve for policy {d} is not finite")
    return PotentialVector(g, cost, d)


def action_values(mdp: Mdp, cost, g: np.ndarray) -> np.ndarray:
    """``c(i, a) + sum_j p(j|i, a) g(j)``; ``+inf`` where the action does not exist."""
    q = np.asarray(cost, dtype=float) + mdp.transitions @ g
    return np.where(mdp.valid, q, np.inf)


def advantages(mdp: Mdp, pot: PotentialVector) -> np.ndarray:
    """Cost-to-switch table: ``Q(i, a) - Q(i, d(i))``. Negative entries improve the average."""
    q = action_values(mdp, pot.cost, pot.g)
    rows = np.arange(mdp.n_states)
    return q - q[rows, list(pot.policy)][:, None]


def improve(mdp: Mdp, pot: PotentialVector, tol: float = IMPROVE_TOL) -> Policy:
    """One improvement step.

    Keeps the incumbent action whenever it is within ``tol`` of the best action
    value, otherwise switches to the smallest-index action within ``tol`` of
    the best. ``tol`` is relative to the magnitude of the action values.
    """
    q = action_values(mdp, pot.cost, pot.g)
    finite = q[mdp.valid]
    scale = max(1.0, float(np.abs(finite).max()))
    eps = tol * scale
    best = q.min(axis=1)
    rows = np.arange(mdp.n_states)
    current = q[rows, list(pot.policy)]
    near = q <= (best + eps)[:, None]
    first = np.argmax(near, axis=1)
    keep = current <= best + eps
    return tuple(int(a) for a in np.where(keep, list(pot.policy), first))


def policy_iteration(mdp: Mdp, cost, initial: Optional[Sequence[int]] = None,
                     tol: float = IMPROVE_TOL) -> SolverResult:
    """Minimize the long-run average of ``cost`` over deterministic policies."""
    cost = _check_cost(mdp, cost)
    d = mdp.check_policy(initial) if initial is not None else mdp.first_policy()
    seen = {d}
    history = []
    limit = mdp.policy_count + 1
    for it in range(1, limit + 1):
        pot = potentials(mdp, d, cost)
        history.append(pot.average)
        nxt = improve(mdp, pot, tol)
        if nxt == d:
            return SolverResult(d, pot.average, pot, it, tuple(history))
        if nxt in seen:
            raise CycleDetected(f"policy iteration revisited {nxt} after {it} steps")
        seen.add(nxt)
        d = nxt
    raise CycleDetected("policy iteration exceeded the number of deterministic policies")
