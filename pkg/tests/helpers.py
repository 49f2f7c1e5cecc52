"""Shared test fixtures: a degenerate penalty and random family draws."""

import math

import numpy as np

from sparsebnb.intervals import Interval
from sparsebnb.penalties import (
    BigM,
    BigML1,
    BigML2,
    L1,
    L1L2,
    PenaltyModel,
    PositiveL1,
    PositiveL2,
    PowerP,
)

INF = math.inf


class ZeroPenalty(PenaltyModel):
    """h identically zero; degenerate case exercised by the tests only."""

    def value(self, x):
        return 0.0

    def conjugate(self, v):
        return 0.0 if v == 0.0 else INF

    def prox(self, gamma, x):
        return x

    def subdiff(self, x):
        return Interval.point(0.0)

    def conjugate_subdiff(self, v):
        if v != 0.0:
            raise ValueError("dom h* = {0}")
        return Interval(-INF, INF)

    def conjugate_domain(self):
        return Interval(0.0, 0.0)

    def to_json(self):
        raise NotImplementedError


def sample_penalty(rng: np.random.Generator) -> PenaltyModel:
    """Random family with parameters in a well-scaled band."""
    u = lambda a, b: float(rng.uniform(a, b))
    makers = [
        lambda: BigM(M=u(0.3, 3.0)),
        lambda: L1(sigma=u(0.3, 3.0)),
        lambda: PowerP(sigma=u(0.3, 3.0), p=u(1.2, 3.5)),
        lambda: L1L2(sigma=u(0.3, 3.0), sigma2=u(0.3, 3.0)),
        lambda: BigML1(M=u(0.3, 3.0), sigma=u(0.3, 3.0)),
        lambda: BigML2(M=u(0.3, 3.0), sigma=u(0.3, 3.0)),
        lambda: PositiveL1(sigma=u(0.3, 3.0)),
        lambda: PositiveL2(sigma=u(0.3, 3.0)),
    ]
    return makers[int(rng.integers(len(makers)))]()


def domain_radius(pen: PenaltyModel) -> float:
    """A radius r with [-r, r] (or [0, r]) inside dom h."""
    return getattr(pen, "M", 6.0)


def sample_domain_point(rng: np.random.Generator, pen: PenaltyModel) -> float:
    r = domain_radius(pen)
    lo = 0.0 if pen.one_sided else -r
    return float(rng.uniform(lo, r))
