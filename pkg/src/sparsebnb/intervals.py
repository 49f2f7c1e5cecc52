"""Closed intervals of the extended real line.

Subdifferentials of the scalar functions in this package are always closed
(possibly unbounded) intervals, so they are passed around as (lo, hi) pairs
with -inf/+inf allowed as endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi]; endpoints may be -inf or +inf."""

    lo: float
    hi: float

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise ValueError("interval endpoints must not be NaN")
        if self.lo > self.hi:
            raise ValueError(f"empty interval: lo={self.lo} > hi={self.hi}")

    @staticmethod
    def point(v: float) -> "Interval":
        return Interval(v, v)

    def contains(self, v: float, tol: float = 0.0) -> bool:
        """Membership test with an absolute slack on both endpoints."""
        lo = self.lo if math.isinf(self.lo) else self.lo - tol
        hi = self.hi if math.isinf(self.hi) else self.hi + tol
        return lo <= v <= hi

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def __str__(self) -> str:
        return f"[{self.lo}, {self.hi}]"
