"""Multi-period inventory control benchmark with binomial demand and no lead time.

Stock ``s`` in ``0..C`` is reviewed each period and ``a`` in ``0..C-s`` units are
ordered. Demand ``xi ~ Binomial(C, p)``; next stock is ``max(s + a - xi, 0)``.
The reward is the negated expected cost of ordering, holding the next-period
stock, and unmet demand.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidModel
from .mdp_core import Mdp


@dataclass(frozen=True)
class InventoryParams:
    capacity: int = 4
    p: float = 0.6
    order_cost: float = 1.0
    holding_cost: float = 0.7
    shortage_cost: float = 2.9
    beta: float = 10.0

    def __post_init__(self):
        if int(self.capacity) != self.capacity or self.capacity < 1:
            raise InvalidModel(f"capacity must be a positive integer, got {self.capacity}")
        if not 0.0 <= self.p <= 1.0:
            raise InvalidModel(f"demand probability must lie in [0, 1], got {self.p}")
        if min(self.order_cost, self.holding_cost, self.shortage_cost) < 0:
            raise InvalidModel("unit costs must be nonnegative")
        if self.beta < 0:
            raise InvalidModel("beta must be nonnegative")


def binomial_pmf(n: int, p: float, k: int) -> float:
    if p == 0.0:
        return 1.0 if k == 0 else 0.0
    if p == 1.0:
        return 1.0 if k == n else 0.0
    log_pmf = (math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
               + k * math.log(p) + (n - k) * math.log1p(-p))
    return math.exp(log_pmf)


def build_inventory_mdp(params: InventoryParams = InventoryParams()) -> Mdp:
    C = int(params.capacity)
    S = C + 1
    pmf = np.array([binomial_pmf(C, params.p, k) for k in range(S)])
    pmf /= pmf.sum()
    demand = np.arange(S)
    P = np.zeros((S, S, S))
    R = np.full((S, S), np.nan)
    for s in range(S):
        for a in range(C + 1 - s):
            level = s + a
            nxt = np.maximum(level - demand, 0)
            np.add.at(P[s, a], nxt, pmf)
            shortage = np.maximum(demand - level, 0)
            R[s, a] = -(params.order_cost * a + params.holding_cost * (pmf @ nxt)
                        + params.shortage_cost * (pmf @ shortage))
    name = f"inventory-C{C}"
    return Mdp(P, R, tuple(C + 1 - s for s in range(S)), beta=params.beta, name=name)
