import math

import numpy as np
import pytest

from mvmdp.errors import InvalidModel
from mvmdp.inventory import InventoryParams, binomial_pmf, build_inventory_mdp
from mvmdp.mdp_core import evaluate_batch, policy_array


def test_binomial_pmf():
    assert binomial_pmf(4, 0.6, 0) == pytest.approx(0.0256, abs=1e-15)
    assert binomial_pmf(4, 0.6, 2) == pytest.approx(0.3456, abs=1e-15)
    assert math.fsum(binomial_pmf(9, 0.37, k) for k in range(10)) == pytest.approx(1.0, abs=1e-14)
    assert binomial_pmf(3, 0.0, 0) == 1.0 and binomial_pmf(3, 1.0, 3) == 1.0


def test_default_instance_structure():
    mdp = build_inventory_mdp()
    assert mdp.n_states == 5
    assert mdp.action_counts == (5, 4, 3, 2, 1)
    assert mdp.policy_count == 120
    rows = mdp.transitions[mdp.valid]
    np.testing.assert_allclose(rows.sum(axis=1), 1.0, atol=1e-12)


def test_full_state_reward():
    p = InventoryParams()
    mdp = build_inventory_mdp(p)
    C = p.capacity
    expected = -p.holding_cost * sum(binomial_pmf(C, p.p, k) * (C - k) for k in range(C + 1))
    assert mdp.rewards[C, 0] == pytest.approx(expected, abs=1e-12)


def test_reward_by_direct_expectation():
    p = InventoryParams(capacity=3, p=0.3, order_cost=1.5, holding_cost=0.2, shortage_cost=4.0)
    mdp = build_inventory_mdp(p)
    for s in range(4):
        for a in range(4 - s):
            cost = 0.0
            for xi in range(4):
                q = binomial_pmf(3, 0.3, xi)
                cost += q * (1.5 * a + 0.2 * max(s + a - xi, 0) + 4.0 * max(xi - s - a, 0))
            assert mdp.rewards[s, a] == pytest.approx(-cost, abs=1e-12)
            assert mdp.transitions[s, a, 0] == pytest.approx(
                sum(binomial_pmf(3, 0.3, xi) for xi in range(s + a, 4)), abs=1e-12)


def test_rewards_nonpositive_and_bounded():
    p = InventoryParams()
    mdp = build_inventory_mdp(p)
    b = mdp.reward_bounds()
    assert b.hi <= 0
    C = p.capacity
    assert b.lo >= -(p.order_cost + p.holding_cost + p.shortage_cost) * C


def test_every_policy_is_unichain():
    mdp = build_inventory_mdp()
    pi, _, _ = evaluate_batch(mdp, policy_array(mdp))
    assert pi.shape == (120, 5)


@pytest.mark.parametrize("kwargs", [dict(capacity=0), dict(p=1.5), dict(holding_cost=-1.0), dict(beta=-2.0)])
def test_invalid_params(kwargs):
    with pytest.raises(InvalidModel):
        InventoryParams(**kwargs)
