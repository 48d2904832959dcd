"""Parametric analysis of the auxiliary problem in the pseudo mean ``y``.

The auxiliary cost splits as ``c + y c' + w_var y^2`` with ``c = w_var r^2 - w_mean r``
and ``c' = -2 w_var r``. For a fixed policy the reduced costs of both parts come
from two potential solves; the policy stays optimal exactly while
``zeta + y zeta' <= 0`` holds entrywise, which pins down an interval of ``y``.
Walking these intervals left to right decomposes the optimal value curve into
quadratic pieces ``eta_k + w_var (y - mu_k)^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .avg_solver import PotentialVector, potentials
from .errors import InconsistentCertificate, SegmentLimitExceeded
from .mdp_core import Mdp, Mode, Policy, objective_weights
from .pseudo_mv import solve_auxiliary

ZETA_PRIME_TOL = 1e-12
EPS_STEP = 1e-9
SAME_PIECE_TOL = 1e-12
FIXED_POINT_TOL = 1e-9

LOCAL_OPTIMUM = "local-optimum"
NON_OPTIMUM = "non-optimum-fixed-point"
BOUNDARY_OPTIMUM = "boundary-optimum"


@dataclass(frozen=True, eq=False)
class TestCoefficients:
    __test__ = False  # not a pytest class

    zeta: np.ndarray
    zeta_prime: np.ndarray
    policy: Policy
    g: PotentialVector
    g_prime: PotentialVector

    def at(self, y: float) -> np.ndarray:
        """Combined reduced costs at ``y``; positive entries are improving switches."""
        return self.zeta + y * self.zeta_prime


@dataclass(frozen=True)
class CurveSegment:
    lo: float
    hi: float
    policy: Policy
    objective: float
    mean: float
    w_var: float

    def value(self, y):
        return self.objective + self.w_var * (np.asarray(y, dtype=float) - self.mean) ** 2

    def slope(self, y: float) -> float:
        return 2.0 * self.w_var * (y - self.mean)


@dataclass(frozen=True)
class FixedPoint:
    y: float
    objective: float
    kind: str
    segment: int


def _split_cost(mdp: Mdp, mode: Mode) -> tuple[np.ndarray, np.ndarray]:
    w_var, w_mean = objective_weights(mdp, mode)
    r = mdp.rewards
    return w_var * r**2 - w_mean * r, -2.0 * w_var * r


def _reduced(mdp: Mdp, pot: PotentialVector) -> np.ndarray:
    # g(i) - sum_j p(j|i,a) g(j) + sum_j g(j) - cost(i,a)
    z = pot.g[:, None] - mdp.transitions @ pot.g + pot.average - pot.cost
    return np.where(mdp.valid, z, np.nan)


def test_coefficients(mdp: Mdp, d: Sequence[int], mode: Mode = Mode.MEAN_VARIANCE) -> TestCoefficients:
    d = mdp.check_policy(d)
    c, c_prime = _split_cost(mdp, mode)
    g = potentials(mdp, d, c)
    g_prime = potentials(mdp, d, c_prime)
    zeta = _reduced(mdp, g)
    zeta_prime = _reduced(mdp, g_prime)
    rows = np.arange(mdp.n_states)
    zeta[rows, list(d)] = 0.0
    zeta_prime[rows, list(d)] = 0.0
    return TestCoefficients(zeta, zeta_prime, d, g, g_prime)


test_coefficients.__test__ = False


def critical_interval(mdp: Mdp, d: Sequence[int], mode: Mode = Mode.MEAN_VARIANCE,
                      coeffs: Optional[TestCoefficients] = None) -> tuple[float, float]:
    """Range of pseudo means over which ``d`` stays optimal for the auxiliary problem."""
    tc = coeffs if coeffs is not None else test_coefficients(mdp, d, mode)
    z, zp = tc.zeta[mdp.valid], tc.zeta_prime[mdp.valid]
    neg = zp < -ZETA_PRIME_TOL
    pos = zp > ZETA_PRIME_TOL
    lo = float(np.max(-z[neg] / zp[neg])) if neg.any() else -math.inf
    hi = float(np.min(-z[pos] / zp[pos])) if pos.any() else math.inf
    flat = ~(neg | pos)
    scale = max(1.0, float(np.abs(z).max(initial=0.0)))
    if np.any(z[flat] > 1e-9 * scale):
        raise InconsistentCertificate(f"policy {tc.policy} is beaten for every pseudo mean")
    if lo > hi + 1e-9 * max(1.0, abs(lo), abs(hi)):
        raise InconsistentCertificate(f"policy {tc.policy} has an empty optimality interval [{lo}, {hi}]")
    return lo, hi


def enumerate_segments(mdp: Mdp, mode: Mode = Mode.MEAN_VARIANCE,
                       eps_step: float = EPS_STEP) -> list[CurveSegment]:
    """Exact piecewise-quadratic decomposition of the optimal auxiliary value over the reward range.

    Adjacent pieces with the same quadratic (policies differing only where it
    does not matter) are merged into one segment.
    """
    bounds = mdp.reward_bounds()
    w_var, _ = objective_weights(mdp, mode)
    limit = mdp.policy_count
    segments: list[CurveSegment] = []
    raw = 0
    start = bounds.lo
    y = bounds.lo
    warm = None
    while True:
        aux = solve_auxiliary(mdp, y, warm_start=warm, mode=mode)
        warm = aux.policy
        _, hi = critical_interval(mdp, aux.policy, mode)
        step = eps_step
        while hi < y and step < bounds.width + 1.0:
            # solver kept a policy that is only optimal up to rounding; probe further right
            y = min(y + step, bounds.hi)
            step *= 2
            aux = solve_auxiliary(mdp, y, warm_start=None, mode=mode)
            warm = aux.policy
            _, hi = critical_interval(mdp, aux.policy, mode)
        end = min(max(hi, y), bounds.hi)
        raw += 1
        if raw > limit:
            raise SegmentLimitExceeded(f"more than {limit} segments on [{bounds.lo}, {bounds.hi}]")
        seg = CurveSegment(start, end, aux.policy, aux.objective, aux.mean, w_var)
        prev = segments[-1] if segments else None
        if (prev is not None and abs(prev.mean - seg.mean) <= SAME_PIECE_TOL * max(1.0, abs(seg.mean))
                and abs(prev.objective - seg.objective) <= SAME_PIECE_TOL * max(1.0, abs(seg.objective))):
            segments[-1] = CurveSegment(prev.lo, end, prev.policy, prev.objective, prev.mean, w_var)
        else:
            segments.append(seg)
        if end >= bounds.hi:
            return segments
        start = end
        y = min(end + eps_step, bounds.hi)


def envelope(segments: Sequence[CurveSegment], y) -> np.ndarray:
    """Evaluate the piecewise curve; each ``y`` uses the segment whose interval contains it."""
    y = np.asarray(y, dtype=float)
    his = np.array([s.hi for s in segments])
    idx = np.minimum(np.searchsorted(his, y, side="left"), len(segments) - 1)
    means = np.array([s.mean for s in segments])[idx]
    objs = np.array([s.objective for s in segments])[idx]
    return objs + segments[0].w_var * (y - means) ** 2


def classify_fixed_points(segments: Sequence[CurveSegment],
                          tol: float = FIXED_POINT_TOL) -> list[FixedPoint]:
    """Locate solutions of ``y = mean of the optimal policy at y`` and label each one.

    Inside a segment the curve has zero slope at the fixed point, a local
    minimum. At a breakpoint shared by two segments the point is a minimum only
    if the left slope is nonpositive and the right slope nonnegative. A fixed
    point sitting on either end of the reward range is a minimum of the curve
    restricted to that range and is labelled separately.
    """
    out = []
    n = len(segments)
    for k, seg in enumerate(segments):
        mu = seg.mean
        if not seg.lo - tol <= mu <= seg.hi + tol:
            continue
        at_lo = abs(mu - seg.lo) <= tol
        at_hi = abs(mu - seg.hi) <= tol
        if not (at_lo or at_hi) or seg.w_var == 0:
            kind = LOCAL_OPTIMUM
        elif (at_lo and k == 0) or (at_hi and k == n - 1):
            kind = BOUNDARY_OPTIMUM
        else:
            left = segments[k - 1].slope(mu) if at_lo else seg.slope(mu)
            right = seg.slope(mu) if at_lo else segments[k + 1].slope(mu)
            kind = LOCAL_OPTIMUM if left <= tol and right >= -tol else NON_OPTIMUM
        out.append(FixedPoint(mu, seg.objective, kind, k))
    return out
