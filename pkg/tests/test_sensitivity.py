import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mvmdp.avg_solver import advantages, potentials
from mvmdp.errors import InconsistentCertificate
from mvmdp.global_opt import enumerate_policies, solve_global
from mvmdp.inventory import InventoryParams, build_inventory_mdp
from mvmdp.mdp_core import Mode, objective_weights
from mvmdp.pseudo_mv import pseudo_cost, solve_auxiliary
from mvmdp.sensitivity import (
    BOUNDARY_OPTIMUM,
    LOCAL_OPTIMUM,
    CurveSegment,
    classify_fixed_points,
    critical_interval,
    enumerate_segments,
    envelope,
    test_coefficients as coefficients,
)

from _instances import random_mdp


@pytest.fixture(scope="module")
def inventory():
    return build_inventory_mdp()


@pytest.fixture(scope="module")
def segments(inventory):
    return enumerate_segments(inventory)


def table_envelope(mdp, ys, mode=Mode.MEAN_VARIANCE):
    # brute-force oracle: min over every policy of its pseudo objective
    table = enumerate_policies(mdp)
    w_var, w_mean = objective_weights(mdp, mode)
    vals = (w_var * (table.variance[None, :] + (ys[:, None] - table.mean[None, :]) ** 2)
            - w_mean * table.mean[None, :])
    return vals.min(axis=1)


def test_coefficients_vanish_on_own_actions(inventory):
    d = (2, 0, 2, 1, 0)
    tc = coefficients(inventory, d)
    rows = np.arange(inventory.n_states)
    assert np.all(tc.zeta[rows, list(d)] == 0.0)
    assert np.all(tc.zeta_prime[rows, list(d)] == 0.0)
    assert np.all(np.isnan(tc.zeta[~inventory.valid]))


def test_beta_zero_has_flat_derivative(inventory):
    mdp = inventory.with_beta(0.0)
    d = solve_global(mdp).policy
    tc = coefficients(mdp, d)
    assert np.nanmax(np.abs(tc.zeta_prime)) == 0.0
    assert critical_interval(mdp, d) == (-math.inf, math.inf)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), t=st.floats(0, 1))
def test_coefficients_are_negated_advantages(seed, t):
    rng = np.random.default_rng(seed)
    mdp = random_mdp(rng, beta=float(rng.choice([0.1, 1.0, 10.0])))
    b = mdp.reward_bounds()
    y = b.lo + t * b.width
    d = tuple(int(rng.integers(0, n)) for n in mdp.action_counts)
    tc = coefficients(mdp, d)
    adv = advantages(mdp, potentials(mdp, d, pseudo_cost(mdp, y)))
    v = mdp.valid
    scale = max(1.0, float(np.abs(adv[v]).max()))
    np.testing.assert_allclose(tc.at(y)[v], -adv[v], atol=1e-9 * scale)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), t=st.floats(0, 1))
def test_certificate_is_consistent(seed, t):
    rng = np.random.default_rng(seed)
    mdp = random_mdp(rng, beta=float(rng.choice([0.1, 1.0, 10.0])))
    b = mdp.reward_bounds()
    y = b.lo + t * b.width
    aux = solve_auxiliary(mdp, y)
    lo, hi = critical_interval(mdp, aux.policy)
    tol = 1e-9 * max(1.0, abs(y))
    assert lo - tol <= y <= hi + tol
    # every pseudo mean inside the interval keeps the policy optimal
    a, c = max(lo, b.lo - 1), min(hi, b.hi + 1)
    tc = coefficients(mdp, aux.policy)
    for z in np.linspace(a, c, 20):
        assert np.nanmax(tc.at(z)) <= 1e-8 * max(1.0, float(np.nanmax(np.abs(tc.zeta))))


def test_non_optimal_policy_has_no_certificate(inventory):
    # filling up to capacity from every state is beaten for every pseudo mean
    with pytest.raises(InconsistentCertificate):
        critical_interval(inventory, (4, 3, 2, 1, 0))


def test_segments_tile_the_reward_range(inventory, segments):
    b = inventory.reward_bounds()
    assert segments[0].lo == b.lo and segments[-1].hi == b.hi
    for s, t in zip(segments, segments[1:]):
        assert s.hi == t.lo
        assert s.mean < t.mean  # means increase with y
    assert len(segments) <= inventory.policy_count


def test_envelope_matches_brute_force(inventory, segments):
    b = inventory.reward_bounds()
    ys = np.linspace(b.lo, b.hi, 1000)
    np.testing.assert_allclose(envelope(segments, ys), table_envelope(inventory, ys), atol=1e-8)


def test_envelope_is_continuous(segments):
    for s, t in zip(segments, segments[1:]):
        assert s.value(s.hi) == pytest.approx(t.value(t.lo), abs=1e-8)


def test_each_piece_is_convex(segments):
    for s in segments:
        ys = np.linspace(s.lo, s.hi, 50)
        v = s.value(ys)
        assert np.all(v[:-2] - 2 * v[1:-1] + v[2:] >= -1e-9)


def test_envelope_has_concave_kinks(inventory, segments):
    # the minimum of equal-curvature parabolas bends down at every breakpoint
    b = inventory.reward_bounds()
    ys = np.linspace(b.lo, b.hi, 1000)
    v = envelope(segments, ys)
    assert np.min(v[:-2] - 2 * v[1:-1] + v[2:]) < -1e-3


@pytest.mark.parametrize("mode", list(Mode))
def test_random_envelopes_match_brute_force(mode):
    rng = np.random.default_rng(31)
    for k in range(15):
        mdp = random_mdp(rng, beta=[0.1, 1.0, 10.0][k % 3])
        segs = enumerate_segments(mdp, mode)
        b = mdp.reward_bounds()
        ys = np.linspace(b.lo, b.hi, 400)
        np.testing.assert_allclose(envelope(segs, ys), table_envelope(mdp, ys, mode), atol=1e-8)


def test_inventory_fixed_points(segments):
    fps = classify_fixed_points(segments)
    local = sorted(round(fp.objective, 3) for fp in fps if fp.kind == LOCAL_OPTIMUM)
    assert local == [4.500, 5.376, 6.382]
    boundary = [fp for fp in fps if fp.kind == BOUNDARY_OPTIMUM]
    assert len(boundary) == 1 and boundary[0].y == pytest.approx(-6.96)


def test_global_minimum_is_a_local_optimum(inventory, segments):
    best = solve_global(inventory)
    fps = [fp for fp in classify_fixed_points(segments) if fp.kind == LOCAL_OPTIMUM]
    assert min(fp.objective for fp in fps) == pytest.approx(best.objective, abs=1e-10)


def test_beta_zero_single_segment(inventory):
    segs = enumerate_segments(inventory.with_beta(0.0))
    assert len(segs) == 1
    fps = classify_fixed_points(segs)
    assert [fp.kind for fp in fps] == [LOCAL_OPTIMUM]


def test_larger_capacity_has_more_local_optima():
    def count(C):
        segs = enumerate_segments(build_inventory_mdp(InventoryParams(capacity=C)))
        return sum(fp.kind == LOCAL_OPTIMUM for fp in classify_fixed_points(segs))
    assert count(7) >= count(4)


def test_breakpoint_classification():
    # two unit-curvature pieces meeting at 0
    left = CurveSegment(-2.0, 0.0, (0,), 1.0, 0.0, 1.0)
    right = CurveSegment(0.0, 2.0, (1,), 0.0, 1.0, 1.0)
    fps = classify_fixed_points([left, right])
    assert [(fp.y, fp.kind) for fp in fps] == [(0.0, "non-optimum-fixed-point"), (1.0, LOCAL_OPTIMUM)]
