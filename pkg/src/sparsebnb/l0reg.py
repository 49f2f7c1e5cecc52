"""Composite regularizer g(x) = lam*1(x != 0) + h(x) and its convex envelope.

The envelope calculus (biconjugate, conjugate, their proxes and
subdifferentials) is driven entirely by the envelope quantities cached in
PenaltyParams.  Sign-asymmetric penalties are handled by applying the
formulas separately on each half-line with the side's own (tau, mu, kappa);
for even families both sides coincide.

Branch membership uses exact comparisons on the computed tau and mu: the
proxes are continuous across branch boundaries, so a one-ulp
misclassification moves the result by at most one ulp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .exceptions import ConfigError, DomainError
from .intervals import Interval
from .penalties import PenaltyModel, PenaltyParams, penalty_from_json

INF = math.inf


@dataclass(frozen=True)
class L0Regularizer:
    """Per-coordinate regularizer with cached envelope quantities."""

    lam: float
    penalty: PenaltyModel
    params: PenaltyParams = field(init=False)

    def __post_init__(self):
        if not (isinstance(self.lam, (int, float)) and math.isfinite(self.lam) and self.lam > 0):
            raise ConfigError(f"lambda must be a positive real, got {self.lam!r}")
        object.__setattr__(self, "params", self.penalty.compute_params(self.lam))

    # -- the regularizer itself -------------------------------------------

    def g_value(self, x: float) -> float:
        """lam*1(x != 0) + h(x)."""
        if x == 0.0:
            return 0.0
        return self.lam + self.penalty.value(x)

    # -- biconjugate (the tightest convex minorant) ------------------------

    def _side(self, x: float) -> tuple[float, float, float]:
        p = self.params
        if x >= 0:
            return p.tau, p.mu, p.kappa
        return p.tau_neg, p.mu_neg, p.kappa_neg

    def biconj_value(self, x: float) -> float:
        if x == 0.0:
            return 0.0
        tau, mu, _ = self._side(x)
        ax = abs(x)
        if ax <= mu:
            return tau * ax
        return self.penalty.value(x) + self.lam

    def biconj_subdiff(self, x: float) -> Interval:
        if math.isinf(self.penalty.value(x)):
            raise DomainError(f"x = {x} outside the penalty domain")
        p = self.params
        if x == 0.0:
            return Interval(-p.tau_neg, p.tau)
        tau, mu, kappa = self._side(x)
        ax = abs(x)
        if ax < mu:
            return Interval.point(tau) if x > 0 else Interval.point(-tau)
        if ax == mu:
            return Interval(tau, kappa) if x > 0 else Interval(-kappa, -tau)
        return self.penalty.subdiff(x)

    def biconj_prox(self, gamma: float, x: float) -> float:
        if x == 0.0:
            return 0.0
        tau, mu, _ = self._side(x)
        ax = abs(x)
        if ax <= gamma * tau:
            return 0.0
        if ax <= gamma * tau + mu:
            return math.copysign(ax - gamma * tau, x)
        return self.penalty.prox(gamma, x)

    # -- conjugate ----------------------------------------------------------

    def conj_value(self, v: float) -> float:
        r = self.penalty.conjugate(v) - self.lam
        return r if r > 0.0 else 0.0

    def conj_subdiff(self, v: float) -> Interval:
        if math.isinf(self.penalty.conjugate(v)):
            raise DomainError(f"v = {v} outside the conjugate domain")
        p = self.params
        if v == 0.0:
            lo = -p.mu_neg if p.tau_neg == 0.0 else 0.0
            hi = p.mu if p.tau == 0.0 else 0.0
            return Interval(lo, hi)
        tau, mu, _ = self._side(v)
        av = abs(v)
        if av < tau:
            return Interval.point(0.0)
        if av == tau:
            return Interval(0.0, mu) if v > 0 else Interval(-mu, 0.0)
        return self.penalty.conjugate_subdiff(v)

    def conj_prox(self, gamma: float, v: float) -> float:
        if v == 0.0:
            return 0.0
        tau, mu, _ = self._side(v)
        av = abs(v)
        if av <= tau:
            return v
        if av <= tau + gamma * mu:
            return math.copysign(tau, v)
        # prox of gamma*h* through the extended Moreau decomposition
        return v - gamma * self.penalty.prox(1.0 / gamma, v / gamma)

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        return {"lambda": self.lam, "penalty": self.penalty.to_json()}


def regularizer_from_json(obj: dict) -> L0Regularizer:
    """Build from {"lambda": ..., "penalty": {...}}."""
    if not isinstance(obj, dict):
        raise ConfigError("regularizer: expected a JSON object")
    extra = set(obj) - {"lambda", "penalty"}
    if extra or "lambda" not in obj or "penalty" not in obj:
        raise ConfigError("regularizer: expected exactly the fields 'lambda' and 'penalty'")
    return L0Regularizer(lam=obj["lambda"], penalty=penalty_from_json(obj["penalty"]))
