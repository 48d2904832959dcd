"""Finite unions of disjoint closed intervals, used as the unexplored pseudo-mean domain."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .errors import EmptyDomain

EPS_MERGE = 1e-12


@dataclass(frozen=True)
class IntervalSet:
    """Sorted, disjoint closed intervals ``(lo, hi)``.

    Gaps narrower than ``EPS_MERGE`` are merged. Pieces left over by a
    subtraction that are no longer than ``EPS_MERGE`` are dropped, so repeated
    cuts cannot fragment the set without bound.
    """

    pieces: tuple[tuple[float, float], ...] = ()

    @classmethod
    def closed(cls, lo: float, hi: float) -> "IntervalSet":
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        return cls(((float(lo), float(hi)),))

    @classmethod
    def from_pieces(cls, pieces: Iterable[tuple[float, float]]) -> "IntervalSet":
        merged: list[list[float]] = []
        for lo, hi in sorted((float(a), float(b)) for a, b in pieces):
            if lo > hi:
                raise ValueError(f"empty interval [{lo}, {hi}]")
            if merged and lo <= merged[-1][1] + EPS_MERGE:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        return cls(tuple((lo, hi) for lo, hi in merged))

    def __iter__(self):
        return iter(self.pieces)

    def __len__(self):
        return len(self.pieces)

    def is_empty(self) -> bool:
        return not self.pieces

    def total_length(self) -> float:
        return math.fsum(hi - lo for lo, hi in self.pieces)

    def contains(self, y: float) -> bool:
        return any(lo <= y <= hi for lo, hi in self.pieces)

    def subtract(self, lo: float, hi: float) -> "IntervalSet":
        """Remove the closed interval ``[lo, hi]``; endpoints may be infinite."""
        if lo > hi:
            raise ValueError(f"cut [{lo}, {hi}] is reversed")
        out = []
        for a, b in self.pieces:
            if hi < a or lo > b:
                out.append((a, b))
                continue
            if lo > a and lo - a > EPS_MERGE:
                out.append((a, lo))
            if hi < b and b - hi > EPS_MERGE:
                out.append((hi, b))
        return IntervalSet.from_pieces(out)

    def first_interval_midpoint(self) -> float:
        """Midpoint of the piece with the largest lower endpoint."""
        if not self.pieces:
            raise EmptyDomain("no interval left to explore")
        lo, hi = self.pieces[-1]
        return (lo + hi) / 2
