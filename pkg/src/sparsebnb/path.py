"""Regularization paths: the level where the zero vector takes over, and
warm-started solves down a logarithmic grid of levels."""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .bnb import BnbOpts, Solution, solve as solve_bnb
from .exceptions import ConfigError, DegenerateError
from .l0reg import L0Regularizer
from .penalties import (
    L1,
    L1L2,
    BigM,
    BigML1,
    BigML2,
    PenaltyModel,
    PositiveL1,
    PositiveL2,
    PowerP,
)
from .relaxation import Problem


@dataclass(frozen=True)
class PathSpec:
    """Grid shape plus the per-point solver options."""

    num_points: int = 20
    ratio_min: float = 1e-2
    solve: BnbOpts = field(default_factory=BnbOpts)

    def __post_init__(self):
        if not isinstance(self.num_points, int) or self.num_points < 1:
            raise ConfigError(f"num_points must be an integer >= 1, got {self.num_points!r}")
        if not (0.0 < self.ratio_min <= 1.0):
            raise ConfigError(f"ratio_min must lie in (0, 1], got {self.ratio_min!r}")


def lambda_max(p: Problem) -> float:
    """Smallest level at which the zero vector is optimal, to 1e-10 relative.

    Zero solves the problem once the origin slope tau of the convexified
    regularizer dominates the gradient seen through A, coordinate by
    coordinate: -tau <= (A^T grad f(0))_i <= tau_neg for every i.  tau is
    non-decreasing in the level, so the threshold is the inverse image of
    the binding gradient entry; it is closed-form for the shipped families
    and bisection for anything else.  The level carried by p.reg is ignored,
    only the penalty family matters.

    Raises DegenerateError when no positive threshold exists: a flat
    gradient at zero, a one-sided family with no entry pushing into its
    domain, or a family whose origin slope cannot reach the binding entry.
    """
    grad0 = p.loss.gradient(np.zeros(p.loss.m))
    c = p.A.T @ grad0
    # Slope demanded from each side of the origin; a clamped side is slack.
    t_pos = max(0.0, float(np.max(-c)))
    t_neg = max(0.0, float(np.max(c)))

    pen = p.reg.penalty
    if pen.one_sided:
        t_neg = 0.0  # negative side is walled off, only tau constrains
        t = t_pos
    else:
        t = max(t_pos, t_neg)
    if t <= 0.0:
        raise DegenerateError("gradient at zero is flat, any positive level keeps x = 0")

    lam = _invert_origin_slope(pen, t)
    if lam is None:
        lam = _bisect_level(pen, t_pos, t_neg)
    if not (lam > 0.0 and math.isfinite(lam)):
        raise DegenerateError("the zero vector is optimal at every positive level")
    return lam


def _invert_origin_slope(pen: PenaltyModel, t: float) -> float | None:
    """Solve tau(lam) = t in closed form; None defers to bisection."""
    if isinstance(pen, BigM):
        return pen.M * t
    if isinstance(pen, (L1, PositiveL1)):
        if pen.sigma >= t:
            raise DegenerateError("the zero vector is optimal at every positive level")
        raise DegenerateError("origin slope is constant in the level and below the gradient")
    if isinstance(pen, PowerP):
        s, q = pen.sigma, pen.p
        return s * ((q - 1.0) / q) * (t / s) ** (q / (q - 1.0))
    if isinstance(pen, L1L2):
        if t <= pen.sigma:
            raise DegenerateError("the zero vector is optimal at every positive level")
        return (t - pen.sigma) ** 2 / (2.0 * pen.sigma2)
    if isinstance(pen, BigML1):
        if t <= pen.sigma:
            raise DegenerateError("the zero vector is optimal at every positive level")
        return pen.M * (t - pen.sigma)
    if isinstance(pen, BigML2):
        if t <= pen.sigma * pen.M:
            return t * t / (2.0 * pen.sigma)
        return pen.M * t - pen.sigma * pen.M * pen.M / 2.0
    if isinstance(pen, PositiveL2):
        return t * t / (2.0 * pen.sigma)
    return None


def _bisect_level(pen: PenaltyModel, t_pos: float, t_neg: float) -> float:
    def hold(lam: float) -> bool:
        q = pen.compute_params(lam)
        return q.tau >= t_pos and q.tau_neg >= t_neg

    hi = 1.0
    for _ in range(200):
        if hold(hi):
            break
        hi *= 2.0
    else:
        raise DegenerateError("origin slope stays below the gradient at every level")
    lo = 0.0
    while hi - lo > 1e-10 * hi:
        if hi < 1e-150:
            raise DegenerateError("the zero vector is optimal at every positive level")
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if hold(mid):
            hi = mid
        else:
            lo = mid
    return hi


def fit_path(p: Problem, spec: PathSpec | None = None) -> list[tuple[float, Solution]]:
    """Solve down a log grid from lambda_max to ratio_min * lambda_max.

    Each point is warm-started with the previous optimizer, fed to the
    solver as both the root relaxation's starting vector and the initial
    incumbent.  The first point sits at lambda_max and returns the zero
    vector.  Non-Optimal statuses are recorded and the path continues.
    """
    spec = spec or PathSpec()
    lam_hi = lambda_max(p)
    k = spec.num_points
    if k == 1:
        grid = [lam_hi]
    else:
        step = spec.ratio_min ** (1.0 / (k - 1))
        grid = [lam_hi * step**j for j in range(k)]

    out: list[tuple[float, Solution]] = []
    warm = None
    for lam in grid:
        p_k = replace(p, reg=L0Regularizer(lam=lam, penalty=p.reg.penalty))
        sol = solve_bnb(p_k, spec.solve, warm_start=warm)
        out.append((lam, sol))
        warm = sol.x_opt
    return out
