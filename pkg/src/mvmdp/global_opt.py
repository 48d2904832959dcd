"""Global and local search over the pseudo mean, plus the exhaustive oracle.

The global search keeps a set of unexplored pseudo means, starting from the
reward range. Each step solves the auxiliary problem at the midpoint of the
right-most unexplored piece; the optimal policy of that problem dominates
every policy whose mean is at least as close to ``y`` as its own mean, so
that whole window is discarded. The plus variant also discards every mean at
or below ``mu - beta * sigma`` of the auxiliary optimum.
"""
from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InvalidModel, MaxIterationsExceeded, PolicySpaceTooLarge
from .intervals import IntervalSet
from .mdp_core import (
    EvaluatedPolicy,
    Mdp,
    Mode,
    Policy,
    evaluate_batch,
    evaluate_policy,
    objective_weights,
    policy_array,
)
from .pseudo_mv import AuxiliarySolution, solve_auxiliary

EPS_CUT = 1e-9
BEST_TOL = 1e-12
FIXED_POINT_TOL = 1e-10
MAX_ITERATIONS_CAP = 10**6
DEFAULT_MAX_POLICIES = 10**6
ENV_MAX_AUX_SOLVES = "MVMDP_MAX_AUX_SOLVES"
_BATCH = 4096


class Algorithm(str, enum.Enum):
    GLOBAL = "global"
    GLOBAL_PLUS = "global-plus"
    LOCAL = "local"
    BRUTE = "brute"


@dataclass(frozen=True)
class SolveOptions:
    algorithm: Algorithm = Algorithm.GLOBAL
    mode: Mode = Mode.MEAN_VARIANCE
    max_iterations: Optional[int] = None
    eps_cut: float = EPS_CUT
    y0: Optional[float] = None
    max_policies: int = DEFAULT_MAX_POLICIES

    def __post_init__(self):
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.eps_cut <= 0:
            raise ValueError("eps_cut must be positive")


@dataclass(frozen=True)
class IterationRecord:
    y: float
    policy: Policy
    mean: float
    variance: float
    objective: float
    pseudo_objective: float
    removed: tuple[tuple[float, float], ...]
    best_objective: float


@dataclass(frozen=True, eq=False)
class SolveReport:
    algorithm: Algorithm
    mode: Mode
    policy: Policy
    objective: float
    mean: float
    variance: float
    y: float
    aux_solves: int
    trace: tuple[IterationRecord, ...]
    termination: str
    policies_evaluated: int = 0

    @property
    def eta(self) -> float:
        return self.objective


@dataclass(frozen=True)
class FrontierPoint:
    beta: float
    mean: float
    variance: float
    objective: float
    policy: Policy


def default_max_iterations(mdp: Mdp) -> int:
    """Safety bound on auxiliary solves: ``2 |D| + 1`` capped, overridable from the environment."""
    env = os.environ.get(ENV_MAX_AUX_SOLVES)
    if env:
        value = int(env)
        if value < 1:
            raise ValueError(f"{ENV_MAX_AUX_SOLVES} must be a positive integer")
        return value
    return min(2 * mdp.policy_count + 1, MAX_ITERATIONS_CAP)


def lemma3_cut(y: float, mu_opt: float, eps_cut: float = EPS_CUT) -> tuple[float, float]:
    """Window of means dominated by the auxiliary optimum at ``y``; never narrower than ``2 eps_cut``."""
    radius = max(abs(y - mu_opt), eps_cut)
    return y - radius, y + radius


def lemma4_cut(mu_opt: float, sigma_opt: float, beta: float) -> tuple[float, float]:
    """Half-line of means that cannot beat a policy with mean ``mu_opt`` and variance ``sigma_opt``."""
    return -math.inf, mu_opt - beta * sigma_opt


def is_dominated_lemma4(candidate: EvaluatedPolicy, reference: EvaluatedPolicy, beta: float) -> bool:
    threshold = reference.mean - beta * reference.variance
    if candidate.mean <= threshold:
        return True
    if beta == 0:
        return False
    return candidate.variance >= reference.variance + (candidate.mean - reference.mean) / beta


def _clip(cut: tuple[float, float], lo: float, hi: float) -> Optional[tuple[float, float]]:
    a, b = max(cut[0], lo), min(cut[1], hi)
    return (a, b) if a <= b else None


def _record(aux: AuxiliarySolution, removed, best: EvaluatedPolicy) -> IterationRecord:
    return IterationRecord(aux.y, aux.policy, aux.mean, aux.variance, aux.objective,
                           aux.pseudo_objective, tuple(removed), best.objective)


def _report(algorithm, mode, best: EvaluatedPolicy, trace, termination, evaluated=0) -> SolveReport:
    return SolveReport(Algorithm(algorithm), Mode(mode), best.policy, best.objective, best.mean,
                       best.variance, best.mean, len(trace), tuple(trace), termination, evaluated)


def solve_global(mdp: Mdp, opts: SolveOptions = SolveOptions()) -> SolveReport:
    mode = opts.mode
    plus = opts.algorithm is Algorithm.GLOBAL_PLUS and mode is Mode.MEAN_VARIANCE
    bounds = mdp.reward_bounds()
    limit = opts.max_iterations or default_max_iterations(mdp)
    domain = IntervalSet.closed(bounds.lo, bounds.hi)
    best: Optional[EvaluatedPolicy] = None
    warm = None
    trace: list[IterationRecord] = []
    while not domain.is_empty():
        if len(trace) >= limit:
            raise MaxIterationsExceeded(
                f"{len(trace)} auxiliary solves without emptying the domain; "
                f"{len(domain)} pieces remain, total length {domain.total_length():.3e}"
            )
        y = domain.first_interval_midpoint()
        aux = solve_auxiliary(mdp, y, warm_start=warm, mode=mode)
        warm = aux.policy
        cuts = [_clip(lemma3_cut(y, aux.mean, opts.eps_cut), bounds.lo, bounds.hi)]
        if plus:
            cuts.append(_clip(lemma4_cut(aux.mean, aux.variance, mdp.beta), bounds.lo, bounds.hi))
        cuts = [c for c in cuts if c is not None]
        for cut in cuts:
            domain = domain.subtract(*cut)
        if best is None or aux.objective < best.objective - BEST_TOL:
            best = aux.evaluated
        trace.append(_record(aux, cuts, best))
    return _report(opts.algorithm, mode, best, trace, "domain-exhausted")


def solve_local(mdp: Mdp, y0: Optional[float] = None, mode: Mode = Mode.MEAN_VARIANCE,
                max_iterations: Optional[int] = None) -> SolveReport:
    """Iterate ``y <- mean of the auxiliary optimum at y`` until it stops moving."""
    bounds = mdp.reward_bounds()
    y = bounds.lo if y0 is None else float(y0)
    if not bounds.lo <= y <= bounds.hi:
        raise InvalidModel(f"y0={y} lies outside the reward range [{bounds.lo}, {bounds.hi}]")
    limit = max_iterations or default_max_iterations(mdp)
    warm = None
    seen: set[Policy] = set()
    trace: list[IterationRecord] = []
    best = None
    while True:
        if len(trace) >= limit:
            raise MaxIterationsExceeded(f"no fixed point after {len(trace)} auxiliary solves")
        aux = solve_auxiliary(mdp, y, warm_start=warm, mode=mode)
        warm = aux.policy
        if best is None or aux.objective < best.objective - BEST_TOL:
            best = aux.evaluated
        trace.append(_record(aux, (), best))
        if abs(aux.mean - y) <= FIXED_POINT_TOL:
            termination = "fixed-point"
            break
        if aux.policy in seen:
            termination = "policy-repeat"
            break
        seen.add(aux.policy)
        y = aux.mean
    return _report(Algorithm.LOCAL, mode, aux.evaluated, trace, termination)


def local_sweep(mdp: Mdp, y0s: Iterable[float], mode: Mode = Mode.MEAN_VARIANCE) -> list[SolveReport]:
    return [solve_local(mdp, y0, mode) for y0 in y0s]


def uniform_y0_grid(mdp: Mdp, n: int) -> np.ndarray:
    bounds = mdp.reward_bounds()
    return np.linspace(bounds.lo, bounds.hi, n)


@dataclass(frozen=True, eq=False)
class PolicyTable:
    """Every deterministic policy with its steady-state mean and variance."""

    policies: np.ndarray
    mean: np.ndarray
    variance: np.ndarray

    def objective(self, w_var: float, w_mean: float) -> np.ndarray:
        return w_var * self.variance - w_mean * self.mean


def enumerate_policies(mdp: Mdp, max_policies: int = DEFAULT_MAX_POLICIES) -> PolicyTable:
    n = mdp.policy_count
    if n > max_policies:
        raise PolicySpaceTooLarge(f"{n} policies exceed the enumeration cap {max_policies}")
    pols, mus, sigmas = [], [], []
    for start in range(0, n, _BATCH):
        chunk = policy_array(mdp, start, start + _BATCH)
        _, mu, sigma = evaluate_batch(mdp, chunk)
        pols.append(chunk)
        mus.append(mu)
        sigmas.append(sigma)
    return PolicyTable(np.concatenate(pols), np.concatenate(mus), np.concatenate(sigmas))


def brute_force(mdp: Mdp, mode: Mode = Mode.MEAN_VARIANCE,
                max_policies: int = DEFAULT_MAX_POLICIES) -> SolveReport:
    n = mdp.policy_count
    if n > max_policies:
        raise PolicySpaceTooLarge(f"{n} policies exceed the enumeration cap {max_policies}")
    w_var, w_mean = objective_weights(mdp, mode)
    best_val, best_pol = math.inf, None
    for start in range(0, n, _BATCH):
        chunk = policy_array(mdp, start, start + _BATCH)
        _, mu, sigma = evaluate_batch(mdp, chunk)
        obj = w_var * sigma - w_mean * mu
        k = int(np.argmin(obj))
        if obj[k] < best_val:
            best_val, best_pol = float(obj[k]), tuple(int(a) for a in chunk[k])
    best = evaluate_policy(mdp, best_pol, mode)
    return _report(Algorithm.BRUTE, mode, best, (), "enumerated", evaluated=n)


def solve(mdp: Mdp, opts: SolveOptions = SolveOptions()) -> SolveReport:
    if opts.algorithm is Algorithm.BRUTE:
        return brute_force(mdp, opts.mode, opts.max_policies)
    if opts.algorithm is Algorithm.LOCAL:
        return solve_local(mdp, opts.y0, opts.mode, opts.max_iterations)
    return solve_global(mdp, opts)


def pareto_frontier(mdp: Mdp, betas: Sequence[float],
                    algorithm: Algorithm = Algorithm.GLOBAL) -> list[FrontierPoint]:
    if not len(betas):
        raise ValueError("beta grid is empty")
    points = []
    for beta in betas:
        if beta < 0:
            raise ValueError(f"beta must be nonnegative, got {beta}")
        rep = solve(mdp.with_beta(beta), SolveOptions(algorithm=algorithm))
        points.append(FrontierPoint(float(beta), rep.mean, rep.variance, rep.objective, rep.policy))
    return points
