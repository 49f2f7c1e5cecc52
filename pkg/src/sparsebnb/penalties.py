"""Separable scalar penalty families and their convex calculus.

Each family implements the handful of scalar operations the rest of the
package is built from: the value h(x), the convex conjugate h*(v), the
proximal operator of gamma*h, and the subdifferentials of h and h*.  All of
them are exact closed forms except the PowerP prox for non-quadratic
exponents, which falls back to a safeguarded scalar Newton solve.

`compute_params` maps a sparsity level lam to the envelope quantities
(tau, mu, kappa, beta) that drive the relaxed regularizer; closed forms are
provided per family and cross-checked against the generic bisection fallback.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, fields

from .exceptions import ConfigError, DomainError, NumericalError
from .intervals import Interval

INF = math.inf


@dataclass(frozen=True)
class PenaltyParams:
    """Envelope quantities of lam*1(x != 0) + h(x) for a fixed level lam.

    tau is the slope of the convexified regularizer at the origin, mu the
    radius where it rejoins lam + h, kappa the largest slope of h at that
    radius, and beta the supremum of the domain of h*.  One-sided families
    carry +inf in the *_neg mirror fields; even families mirror exactly.
    """

    tau: float
    mu: float
    kappa: float
    beta: float
    tau_neg: float = None  # type: ignore[assignment]
    mu_neg: float = None  # type: ignore[assignment]
    kappa_neg: float = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.tau_neg is None:
            object.__setattr__(self, "tau_neg", self.tau)
        if self.mu_neg is None:
            object.__setattr__(self, "mu_neg", self.mu)
        if self.kappa_neg is None:
            object.__setattr__(self, "kappa_neg", self.kappa)


class PenaltyModel(ABC):
    """Closed scalar penalty h with h(0) = 0 and minimum at the origin."""

    @abstractmethod
    def value(self, x: float) -> float:
        """h(x); +inf outside the domain."""

    @abstractmethod
    def conjugate(self, v: float) -> float:
        """h*(v) = sup_x v*x - h(x); +inf outside dom h*."""

    @abstractmethod
    def prox(self, gamma: float, x: float) -> float:
        """argmin_u 0.5*(u - x)^2 + gamma*h(u)."""

    @abstractmethod
    def subdiff(self, x: float) -> Interval:
        """Subdifferential of h at x; DomainError outside dom h."""

    @abstractmethod
    def conjugate_subdiff(self, v: float) -> Interval:
        """Subdifferential of h* at v; DomainError outside dom h*."""

    def conjugate_domain(self) -> Interval:
        """Closure of dom h*."""
        return Interval(-INF, INF)

    @property
    def one_sided(self) -> bool:
        """True when dom h excludes the negative axis."""
        return False

    def compute_params(self, lam: float) -> PenaltyParams:
        """Envelope quantities at level lam; generic fallback unless overridden."""
        return generic_params(self, lam)

    def to_json(self) -> dict:
        out = {"family": type(self).__name__}
        for f in fields(self):  # type: ignore[arg-type]
            out[f.name] = getattr(self, f.name)
        return out


def _check_positive(name: str, value: float) -> None:
    if isinstance(value, bool) or not (
        isinstance(value, (int, float)) and math.isfinite(value) and value > 0
    ):
        raise ConfigError(f"penalty parameter {name!r} must be a positive real, got {value!r}")


def _pow(base: float, exp: float) -> float:
    # Python ** raises instead of returning inf on float overflow
    try:
        return base ** exp
    except OverflowError:
        return INF


def _soft(x: float, t: float) -> float:
    if x > t:
        return x - t
    if x < -t:
        return x + t
    return 0.0


def _clamp(x: float, m: float) -> float:
    return -m if x < -m else (m if x > m else x)


@dataclass(frozen=True)
class BigM(PenaltyModel):
    """Box indicator: h(x) = 0 if |x| <= M, +inf otherwise."""

    M: float

    def __post_init__(self):
        _check_positive("M", self.M)

    def value(self, x):
        return 0.0 if abs(x) <= self.M else INF

    def conjugate(self, v):
        return self.M * abs(v)

    def prox(self, gamma, x):
        return _clamp(x, self.M)

    def subdiff(self, x):
        if abs(x) > self.M:
            raise DomainError(f"|x| > M = {self.M}")
        if x == self.M:
            return Interval(0.0, INF)
        if x == -self.M:
            return Interval(-INF, 0.0)
        return Interval.point(0.0)

    def conjugate_subdiff(self, v):
        if v == 0.0:
            return Interval(-self.M, self.M)
        return Interval.point(math.copysign(self.M, v))

    def compute_params(self, lam):
        _check_lam(lam)
        return PenaltyParams(tau=lam / self.M, mu=self.M, kappa=INF, beta=INF)


@dataclass(frozen=True)
class L1(PenaltyModel):
    """h(x) = sigma * |x|."""

    sigma: float

    def __post_init__(self):
        _check_positive("sigma", self.sigma)

    def value(self, x):
        return self.sigma * abs(x)

    def conjugate(self, v):
        return 0.0 if abs(v) <= self.sigma else INF

    def prox(self, gamma, x):
        return _soft(x, gamma * self.sigma)

    def subdiff(self, x):
        if x == 0.0:
            return Interval(-self.sigma, self.sigma)
        return Interval.point(math.copysign(self.sigma, x))

    def conjugate_subdiff(self, v):
        if abs(v) > self.sigma:
            raise DomainError(f"|v| > sigma = {self.sigma}")
        if v == self.sigma:
            return Interval(0.0, INF)
        if v == -self.sigma:
            return Interval(-INF, 0.0)
        return Interval.point(0.0)

    def conjugate_domain(self):
        return Interval(-self.sigma, self.sigma)

    def compute_params(self, lam):
        _check_lam(lam)
        return PenaltyParams(tau=self.sigma, mu=INF, kappa=INF, beta=self.sigma)


@dataclass(frozen=True)
class PowerP(PenaltyModel):
    """h(x) = (sigma/p) * |x|^p with p > 1."""

    sigma: float
    p: float

    def __post_init__(self):
        _check_positive("sigma", self.sigma)
        if not (isinstance(self.p, (int, float)) and math.isfinite(self.p) and self.p > 1):
            raise ConfigError(f"penalty parameter 'p' must exceed 1, got {self.p!r}")

    def value(self, x):
        return (self.sigma / self.p) * _pow(abs(x), self.p)

    def conjugate(self, v):
        q = self.p / (self.p - 1.0)
        return _pow(abs(v), q) / (q * self.sigma ** (q - 1.0))

    def prox(self, gamma, x):
        if x == 0.0:
            return 0.0
        if self.p == 2.0:
            return x / (1.0 + gamma * self.sigma)
        return math.copysign(_power_prox_abs(abs(x), gamma * self.sigma, self.p), x)

    def subdiff(self, x):
        return Interval.point(math.copysign(self.sigma * _pow(abs(x), self.p - 1.0), x) if x else 0.0)

    def conjugate_subdiff(self, v):
        if v == 0.0:
            return Interval.point(0.0)
        return Interval.point(math.copysign(_pow(abs(v) / self.sigma, 1.0 / (self.p - 1.0)), v))

    def compute_params(self, lam):
        _check_lam(lam)
        mu = (self.p * lam / ((self.p - 1.0) * self.sigma)) ** (1.0 / self.p)
        tau = self.sigma * mu ** (self.p - 1.0)
        return PenaltyParams(tau=tau, mu=mu, kappa=tau, beta=INF)


def _power_prox_abs(x: float, c: float, p: float) -> float:
    # root of u + c*u^(p-1) = x on [0, x]; Newton with bisection safeguard
    lo, hi = 0.0, x
    u = 0.5 * x
    for _ in range(200):
        r = u + c * _pow(u, p - 1.0) - x
        if r == 0.0:
            return u
        if r > 0:
            hi = u
        else:
            lo = u
        d = 1.0 + c * (p - 1.0) * _pow(u, p - 2.0) if u > 0 else INF
        u_new = u - r / d if math.isfinite(d) else 0.5 * (lo + hi)
        if not (lo < u_new < hi):
            u_new = 0.5 * (lo + hi)
        if abs(u_new - u) <= 1e-16 * max(1.0, abs(u)):
            return u_new
        u = u_new
    return u


@dataclass(frozen=True)
class L1L2(PenaltyModel):
    """h(x) = sigma * |x| + (sigma2/2) * x^2."""

    sigma: float
    sigma2: float

    def __post_init__(self):
        _check_positive("sigma", self.sigma)
        _check_positive("sigma2", self.sigma2)

    def value(self, x):
        return self.sigma * abs(x) + 0.5 * self.sigma2 * x * x

    def conjugate(self, v):
        r = abs(v) - self.sigma
        return r * r / (2.0 * self.sigma2) if r > 0 else 0.0

    def prox(self, gamma, x):
        return _soft(x, gamma * self.sigma) / (1.0 + gamma * self.sigma2)

    def subdiff(self, x):
        if x == 0.0:
            return Interval(-self.sigma, self.sigma)
        return Interval.point(math.copysign(self.sigma, x) + self.sigma2 * x)

    def conjugate_subdiff(self, v):
        r = abs(v) - self.sigma
        return Interval.point(math.copysign(r, v) / self.sigma2 if r > 0 else 0.0)

    def compute_params(self, lam):
        _check_lam(lam)
        tau = self.sigma + math.sqrt(2.0 * lam * self.sigma2)
        return PenaltyParams(tau=tau, mu=math.sqrt(2.0 * lam / self.sigma2), kappa=tau, beta=INF)


@dataclass(frozen=True)
class BigML1(PenaltyModel):
    """h(x) = sigma * |x| on [-M, M], +inf outside."""

    M: float
    sigma: float

    def __post_init__(self):
        _check_positive("M", self.M)
        _check_positive("sigma", self.sigma)

    def value(self, x):
        return self.sigma * abs(x) if abs(x) <= self.M else INF

    def conjugate(self, v):
        r = abs(v) - self.sigma
        return self.M * r if r > 0 else 0.0

    def prox(self, gamma, x):
        return _clamp(_soft(x, gamma * self.sigma), self.M)

    def subdiff(self, x):
        if abs(x) > self.M:
            raise DomainError(f"|x| > M = {self.M}")
        if x == 0.0:
            return Interval(-self.sigma, self.sigma)
        if x == self.M:
            return Interval(self.sigma, INF)
        if x == -self.M:
            return Interval(-INF, -self.sigma)
        return Interval.point(math.copysign(self.sigma, x))

    def conjugate_subdiff(self, v):
        if abs(v) < self.sigma:
            return Interval.point(0.0)
        if v == self.sigma:
            return Interval(0.0, self.M)
        if v == -self.sigma:
            return Interval(-self.M, 0.0)
        return Interval.point(math.copysign(self.M, v))

    def compute_params(self, lam):
        _check_lam(lam)
        return PenaltyParams(tau=self.sigma + lam / self.M, mu=self.M, kappa=INF, beta=INF)


@dataclass(frozen=True)
class BigML2(PenaltyModel):
    """h(x) = (sigma/2) * x^2 on [-M, M], +inf outside."""

    M: float
    sigma: float

    def __post_init__(self):
        _check_positive("M", self.M)
        _check_positive("sigma", self.sigma)

    def value(self, x):
        return 0.5 * self.sigma * x * x if abs(x) <= self.M else INF

    def conjugate(self, v):
        if abs(v) <= self.sigma * self.M:
            return v * v / (2.0 * self.sigma)
        return self.M * abs(v) - 0.5 * self.sigma * self.M * self.M

    def prox(self, gamma, x):
        return _clamp(x / (1.0 + gamma * self.sigma), self.M)

    def subdiff(self, x):
        if abs(x) > self.M:
            raise DomainError(f"|x| > M = {self.M}")
        if x == self.M:
            return Interval(self.sigma * self.M, INF)
        if x == -self.M:
            return Interval(-INF, -self.sigma * self.M)
        return Interval.point(self.sigma * x)

    def conjugate_subdiff(self, v):
        if abs(v) <= self.sigma * self.M:
            return Interval.point(v / self.sigma)
        return Interval.point(math.copysign(self.M, v))

    def compute_params(self, lam):
        _check_lam(lam)
        if lam < 0.5 * self.sigma * self.M * self.M:
            tau = math.sqrt(2.0 * lam * self.sigma)
            return PenaltyParams(tau=tau, mu=math.sqrt(2.0 * lam / self.sigma), kappa=tau, beta=INF)
        return PenaltyParams(tau=lam / self.M + 0.5 * self.sigma * self.M, mu=self.M, kappa=INF, beta=INF)


@dataclass(frozen=True)
class PositiveL1(PenaltyModel):
    """h(x) = sigma * x on x >= 0, +inf for x < 0."""

    sigma: float

    def __post_init__(self):
        _check_positive("sigma", self.sigma)

    def value(self, x):
        return self.sigma * x if x >= 0 else INF

    def conjugate(self, v):
        return 0.0 if v <= self.sigma else INF

    def prox(self, gamma, x):
        u = x - gamma * self.sigma
        return u if u > 0 else 0.0

    def subdiff(self, x):
        if x < 0:
            raise DomainError("x < 0")
        if x == 0.0:
            return Interval(-INF, self.sigma)
        return Interval.point(self.sigma)

    def conjugate_subdiff(self, v):
        if v > self.sigma:
            raise DomainError(f"v > sigma = {self.sigma}")
        if v == self.sigma:
            return Interval(0.0, INF)
        return Interval.point(0.0)

    def conjugate_domain(self):
        return Interval(-INF, self.sigma)

    @property
    def one_sided(self):
        return True

    def compute_params(self, lam):
        _check_lam(lam)
        return PenaltyParams(tau=self.sigma, mu=INF, kappa=INF, beta=self.sigma,
                             tau_neg=INF, mu_neg=INF, kappa_neg=INF)


@dataclass(frozen=True)
class PositiveL2(PenaltyModel):
    """h(x) = (sigma/2) * x^2 on x >= 0, +inf for x < 0."""

    sigma: float

    def __post_init__(self):
        _check_positive("sigma", self.sigma)

    def value(self, x):
        return 0.5 * self.sigma * x * x if x >= 0 else INF

    def conjugate(self, v):
        return v * v / (2.0 * self.sigma) if v > 0 else 0.0

    def prox(self, gamma, x):
        return x / (1.0 + gamma * self.sigma) if x > 0 else 0.0

    def subdiff(self, x):
        if x < 0:
            raise DomainError("x < 0")
        if x == 0.0:
            return Interval(-INF, 0.0)
        return Interval.point(self.sigma * x)

    def conjugate_subdiff(self, v):
        return Interval.point(v / self.sigma if v > 0 else 0.0)

    @property
    def one_sided(self):
        return True

    def compute_params(self, lam):
        _check_lam(lam)
        tau = math.sqrt(2.0 * lam * self.sigma)
        return PenaltyParams(tau=tau, mu=math.sqrt(2.0 * lam / self.sigma), kappa=tau, beta=INF,
                             tau_neg=INF, mu_neg=INF, kappa_neg=INF)


FAMILIES: dict[str, type] = {
    cls.__name__: cls
    for cls in (BigM, L1, PowerP, L1L2, BigML1, BigML2, PositiveL1, PositiveL2)
}


def penalty_from_json(obj: dict) -> PenaltyModel:
    """Build a penalty from {"family": ..., <parameter fields>}."""
    if not isinstance(obj, dict):
        raise ConfigError("penalty: expected a JSON object")
    spec = dict(obj)
    name = spec.pop("family", None)
    cls = FAMILIES.get(name)
    if cls is None:
        raise ConfigError(f"penalty.family: unknown family {name!r}")
    expected = {f.name for f in fields(cls)}
    if set(spec) != expected:
        missing = expected - set(spec)
        extra = set(spec) - expected
        parts = []
        if missing:
            parts.append(f"missing {sorted(missing)}")
        if extra:
            parts.append(f"unexpected {sorted(extra)}")
        raise ConfigError(f"penalty ({name}): " + ", ".join(parts))
    return cls(**spec)


def _check_lam(lam: float) -> None:
    if not (math.isfinite(lam) and lam > 0):
        raise ConfigError(f"sparsity level lam must be a positive real, got {lam!r}")


def _tau_side(conj, dom_hi: float, lam: float) -> float:
    """sup{v >= 0 : conj(v) <= lam} via bisection; +inf when never exceeded."""
    if dom_hi < INF and conj(dom_hi) <= lam:
        return dom_hi
    hi = 1.0
    while conj(hi) <= lam:
        hi *= 2.0
        if hi > 1e300:
            return INF
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if conj(mid) <= lam:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, lo):
            break
    return lo


def generic_params(penalty: PenaltyModel, lam: float) -> PenaltyParams:
    """Envelope quantities from the scalar calculus alone.

    tau solves h*(v) = lam on [0, beta] by bisection (h* is non-decreasing
    there), mu is the supremum of the conjugate subdifferential at tau, and
    kappa the supremum of the penalty subdifferential at mu.  Works for any
    PenaltyModel; family closed forms override this for exactness and are
    tested against it.
    """
    _check_lam(lam)
    dom = penalty.conjugate_domain()
    beta = dom.hi
    tau = _tau_side(penalty.conjugate, beta, lam)
    if not math.isfinite(tau):
        raise NumericalError("penalty conjugate never exceeds lam on the positive axis")
    mu = penalty.conjugate_subdiff(tau).hi
    kappa = penalty.subdiff(mu).hi if math.isfinite(mu) else INF

    if not penalty.one_sided:
        return PenaltyParams(tau=tau, mu=mu, kappa=kappa, beta=beta)
    tau_neg = _tau_side(lambda v: penalty.conjugate(-v), -dom.lo, lam)
    if math.isfinite(tau_neg):
        mu_neg = -penalty.conjugate_subdiff(-tau_neg).lo
        kappa_neg = -penalty.subdiff(-mu_neg).lo if math.isfinite(mu_neg) else INF
    else:
        mu_neg = kappa_neg = INF
    return PenaltyParams(tau=tau, mu=mu, kappa=kappa, beta=beta,
                         tau_neg=tau_neg, mu_neg=mu_neg, kappa_neg=kappa_neg)
