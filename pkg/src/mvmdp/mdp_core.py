"""Finite MDP model and exact steady-state evaluation of deterministic policies.

Policies are tuples of per-state action indices. Actions are dense integers
``0 .. len(A(i)) - 1`` at every state; the model keeps the transition kernel as a
zero-padded ``(S, A, S)`` array and the rewards as a NaN-padded ``(S, A)`` array,
where ``A`` is the largest action-set size.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import InvalidModel, NotUnichain, SingularSystem

ROW_SUM_TOL = 1e-12
NEGATIVE_CLAMP = -1e-9
RESIDUAL_TOL = 1e-10

Policy = tuple[int, ...]


class Mode(str, enum.Enum):
    """Objective being minimized over deterministic policies."""

    MEAN_VARIANCE = "mean-variance"
    VARIANCE = "variance"


@dataclass(frozen=True)
class RewardBounds:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise InvalidModel(f"reward bounds out of order: {self.lo} > {self.hi}")

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True, eq=False)
class Mdp:
    """Finite state/action model with a mean-variance tradeoff weight ``beta``."""

    transitions: np.ndarray
    rewards: np.ndarray
    action_counts: tuple[int, ...]
    beta: float = 1.0
    name: str = ""
    action_labels: Optional[tuple[tuple, ...]] = None
    _valid: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        counts = tuple(int(n) for n in self.action_counts)
        object.__setattr__(self, "action_counts", counts)
        S = len(counts)
        if S < 1:
            raise InvalidModel("an MDP needs at least one state")
        if min(counts) < 1:
            raise InvalidModel("every state needs a nonempty action set")
        A = max(counts)
        P = np.array(self.transitions, dtype=float)
        R = np.array(self.rewards, dtype=float)
        if P.shape != (S, A, S):
            raise InvalidModel(f"transitions have shape {P.shape}, expected {(S, A, S)}")
        if R.shape != (S, A):
            raise InvalidModel(f"rewards have shape {R.shape}, expected {(S, A)}")
        valid = np.arange(A)[None, :] < np.array(counts)[:, None]
        if np.any(P[valid] < 0) or np.any(P[valid] > 1):
            raise InvalidModel("transition probabilities must lie in [0, 1]")
        bad = np.abs(P[valid].sum(axis=1) - 1.0) > ROW_SUM_TOL
        if np.any(bad):
            s, a = np.argwhere(valid)[np.flatnonzero(bad)[0]]
            raise InvalidModel(f"transition row ({s}, {a}) does not sum to 1")
        if not np.all(np.isfinite(R[valid])):
            raise InvalidModel("rewards must be finite")
        beta = float(self.beta)
        if not (beta >= 0 and math.isfinite(beta)):
            raise InvalidModel(f"beta must be a nonnegative real, got {self.beta}")
        P[~valid] = 0.0
        R[~valid] = np.nan
        P.flags.writeable = False
        R.flags.writeable = False
        valid.flags.writeable = False
        object.__setattr__(self, "transitions", P)
        object.__setattr__(self, "rewards", R)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "_valid", valid)
        if self.action_labels is not None:
            labels = tuple(tuple(row) for row in self.action_labels)
            if tuple(len(row) for row in labels) != counts:
                raise InvalidModel("action labels do not match action counts")
            object.__setattr__(self, "action_labels", labels)

    @classmethod
    def from_lists(cls, transitions, rewards, beta=1.0, name="", action_labels=None) -> "Mdp":
        """Build from ragged nested lists ``transitions[s][a][j]`` and ``rewards[s][a]``."""
        S = len(transitions)
        if len(rewards) != S:
            raise InvalidModel("transitions and rewards disagree on the state count")
        counts = [len(row) for row in transitions]
        if [len(row) for row in rewards] != counts:
            raise InvalidModel("transitions and rewards disagree on action counts")
        A = max(counts) if counts else 0
        P = np.zeros((S, A, S))
        R = np.full((S, A), np.nan)
        for s in range(S):
            for a in range(counts[s]):
                row = transitions[s][a]
                if len(row) != S:
                    raise InvalidModel(f"transition row ({s}, {a}) has {len(row)} entries, expected {S}")
                P[s, a] = row
                R[s, a] = rewards[s][a]
        return cls(P, R, tuple(counts), beta=beta, name=name, action_labels=action_labels)

    def __eq__(self, other):
        if not isinstance(other, Mdp):
            return NotImplemented
        return (
            self.action_counts == other.action_counts
            and self.beta == other.beta
            and self.name == other.name
            and self.action_labels == other.action_labels
            and np.array_equal(self.transitions, other.transitions)
            and np.array_equal(self.rewards, other.rewards, equal_nan=True)
        )

    __hash__ = None

    @property
    def n_states(self) -> int:
        return len(self.action_counts)

    @property
    def max_actions(self) -> int:
        return self.transitions.shape[1]

    @property
    def valid(self) -> np.ndarray:
        """Boolean ``(S, A)`` mask of existing state-action pairs."""
        return self._valid

    @property
    def policy_count(self) -> int:
        return math.prod(self.action_counts)

    def reward_bounds(self) -> RewardBounds:
        return RewardBounds(float(np.nanmin(self.rewards)), float(np.nanmax(self.rewards)))

    def with_beta(self, beta: float) -> "Mdp":
        return Mdp(self.transitions, self.rewards, self.action_counts, beta, self.name, self.action_labels)

    def policies(self) -> Iterator[Policy]:
        """All deterministic policies in lexicographic order."""
        return itertools.product(*(range(n) for n in self.action_counts))

    def check_policy(self, d: Sequence[int]) -> Policy:
        d = tuple(int(a) for a in d)
        if len(d) != self.n_states:
            raise InvalidModel(f"policy has {len(d)} entries for {self.n_states} states")
        for s, a in enumerate(d):
            if not 0 <= a < self.action_counts[s]:
                raise InvalidModel(f"action {a} is not available in state {s}")
        return d

    def first_policy(self) -> Policy:
        return (0,) * self.n_states

    def transition_matrix(self, d: Policy) -> np.ndarray:
        return self.transitions[np.arange(self.n_states), list(d)]

    def reward_vector(self, d: Policy) -> np.ndarray:
        return self.rewards[np.arange(self.n_states), list(d)]

    def action_label(self, s: int, a: int):
        if self.action_labels is None:
            return a
        return self.action_labels[s][a]


def objective_weights(mdp: Mdp, mode: Mode = Mode.MEAN_VARIANCE) -> tuple[float, float]:
    """Return ``(w_var, w_mean)`` so that the objective is ``w_var * sigma - w_mean * mu``."""
    if Mode(mode) is Mode.VARIANCE:
        return 1.0, 0.0
    return mdp.beta, 1.0


@dataclass(frozen=True, eq=False)
class EvaluatedPolicy:
    policy: Policy
    pi: np.ndarray
    mean: float
    variance: float
    objective: float

    def pseudo_objective(self, y: float, w_var: float) -> float:
        return self.objective + w_var * (y - self.mean) ** 2


def _fundamental(P: np.ndarray) -> np.ndarray:
    S = P.shape[-1]
    return np.eye(S) - P + 1.0


def _clean_distribution(pi: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(pi)):
        raise SingularSystem("stationary solve produced non-finite values")
    if pi.min() < NEGATIVE_CLAMP:
        raise SingularSystem(f"stationary solve produced a negative probability {pi.min():.3e}")
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def stationary_from_matrix(P: np.ndarray) -> np.ndarray:
    """Stationary row vector of ``P`` from ``pi (I - P + e e^T) = e^T``."""
    S = P.shape[0]
    try:
        pi = np.linalg.solve(_fundamental(P).T, np.ones(S))
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from None
    pi = _clean_distribution(pi)
    if np.max(np.abs(pi @ P - pi)) > RESIDUAL_TOL:
        raise SingularSystem("stationary distribution fails the balance equations")
    return pi


def closed_classes(P: np.ndarray) -> list[np.ndarray]:
    """Closed communicating classes of the support graph of ``P`` (Tarjan SCC)."""
    graph = csr_matrix(P > 0)
    n, labels = connected_components(graph, directed=True, connection="strong")
    rows, cols = graph.nonzero()
    leaves = np.zeros(n, dtype=bool)
    leaves[labels[rows][labels[rows] != labels[cols]]] = True
    return [np.flatnonzero(labels == k) for k in range(n) if not leaves[k]]


def check_unichain(mdp: Mdp, d: Policy) -> None:
    classes = closed_classes(mdp.transition_matrix(d))
    if len(classes) != 1:
        raise NotUnichain(f"policy {d} has {len(classes)} closed recurrent classes")


def stationary_distribution(mdp: Mdp, d: Policy, validate: bool = False) -> np.ndarray:
    if validate:
        check_unichain(mdp, mdp.check_policy(d))
    return stationary_from_matrix(mdp.transition_matrix(d))


def long_run_mean(pi: np.ndarray, r: np.ndarray) -> float:
    return float(pi @ r)


def long_run_variance(pi: np.ndarray, r: np.ndarray, mu: float) -> float:
    return float(pi @ (r - mu) ** 2)


def pseudo_variance(pi: np.ndarray, r: np.ndarray, y: float) -> float:
    """Variance of the rewards measured around ``y`` instead of the true mean."""
    return float(pi @ (r - y) ** 2)


def variance_distortion(mu: float, y: float) -> float:
    return (y - mu) ** 2


def evaluate_policy(mdp: Mdp, d: Sequence[int], mode: Mode = Mode.MEAN_VARIANCE,
                    validate: bool = False) -> EvaluatedPolicy:
    d = mdp.check_policy(d)
    pi = stationary_distribution(mdp, d, validate=validate)
    r = mdp.reward_vector(d)
    mu = long_run_mean(pi, r)
    sigma = long_run_variance(pi, r, mu)
    w_var, w_mean = objective_weights(mdp, mode)
    return EvaluatedPolicy(d, pi, mu, sigma, w_var * sigma - w_mean * mu)


def policy_array(mdp: Mdp, start: int = 0, stop: Optional[int] = None) -> np.ndarray:
    """Policies ``start .. stop-1`` of the lexicographic order as an ``(N, S)`` int array."""
    counts = np.array(mdp.action_counts)
    stop = mdp.policy_count if stop is None else min(stop, mdp.policy_count)
    idx = np.arange(start, stop)
    out = np.empty((idx.size, counts.size), dtype=np.intp)
    for s in range(counts.size - 1, -1, -1):
        out[:, s] = idx % counts[s]
        idx = idx // counts[s]
    return out


def evaluate_batch(mdp: Mdp, policies: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized ``(pi, mu, sigma)`` for an ``(N, S)`` array of policies."""
    S = mdp.n_states
    rows = np.arange(S)
    P = mdp.transitions[rows, policies]
    r = mdp.rewards[rows, policies]
    try:
        pi = np.linalg.solve(np.swapaxes(_fundamental(P), 1, 2), np.ones(policies.shape[:1] + (S, 1)))[..., 0]
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from None
    if not np.all(np.isfinite(pi)) or pi.min(initial=0.0) < NEGATIVE_CLAMP:
        raise SingularSystem("a policy in the batch has no valid stationary distribution")
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum(axis=1, keepdims=True)
    resid = np.abs(np.einsum("ni,nij->nj", pi, P) - pi).max(initial=0.0)
    if resid > RESIDUAL_TOL:
        raise SingularSystem("a policy in the batch fails the balance equations")
    mu = np.einsum("ni,ni->n", pi, r)
    sigma = np.einsum("ni,ni->n", pi, (r - mu[:, None]) ** 2)
    return pi, mu, sigma
