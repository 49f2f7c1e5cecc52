"""Data-fitting losses over the linear predictor w = Ax.

Each loss exposes its value, gradient, Fenchel conjugate and a global
curvature bound; the conjugate is needed for the dual bounds of the
relaxation solver, the curvature bound for its step sizes.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod

import numpy as np
from numpy.typing import NDArray

from .exceptions import ConfigError, DimensionError

INF = math.inf


class FittingLoss(ABC):
    """Convex differentiable loss f(w) with targets y of length m."""

    def __init__(self, y: NDArray):
        y = np.asarray(y, dtype=float)
        if y.ndim != 1 or y.size == 0:
            raise ConfigError("targets y must be a non-empty 1-d vector")
        if not np.all(np.isfinite(y)):
            raise ConfigError("targets y must be finite")
        self.y = y
        self.m = y.size

    def _check(self, w: NDArray) -> NDArray:
        w = np.asarray(w, dtype=float)
        if w.shape != (self.m,):
            raise DimensionError(f"expected a vector of length {self.m}, got shape {w.shape}")
        return w

    @abstractmethod
    def value(self, w: NDArray) -> float:
        """f(w)."""

    @abstractmethod
    def gradient(self, w: NDArray) -> NDArray:
        """Gradient of f at w."""

    @abstractmethod
    def conjugate(self, u: NDArray) -> float:
        """f*(u) = sup_w u'w - f(w); +inf outside dom f*."""

    @abstractmethod
    def curvature_bound(self) -> float:
        """L with grad f globally L-Lipschitz."""

    def to_json(self) -> dict:
        return {"family": type(self).__name__}


class LeastSquares(FittingLoss):
    """f(w) = 0.5 * ||y - w||^2."""

    def value(self, w):
        r = self._check(w) - self.y
        return 0.5 * float(r @ r)

    def gradient(self, w):
        return self._check(w) - self.y

    def conjugate(self, u):
        u = self._check(u)
        return float(u @ self.y) + 0.5 * float(u @ u)

    def curvature_bound(self):
        return 1.0


class _BinaryLoss(FittingLoss):
    def __init__(self, y):
        super().__init__(y)
        if not np.all(np.abs(self.y) == 1.0):
            raise ConfigError(f"{type(self).__name__} targets must be -1 or +1")


class Logistic(_BinaryLoss):
    """f(w) = sum log(1 + exp(-y * w))."""

    def value(self, w):
        t = self.y * self._check(w)
        return float(np.sum(np.logaddexp(0.0, -t)))

    def gradient(self, w):
        t = self.y * self._check(w)
        # 1/(1+e^t) = exp(-logaddexp(0, t)), stable for large |t|
        return -self.y * np.exp(-np.logaddexp(0.0, t))

    def conjugate(self, u):
        r = -self.y * self._check(u)
        if np.any(r < 0.0) or np.any(r > 1.0):
            return INF
        with np.errstate(divide="ignore", invalid="ignore"):
            ent = np.where(r > 0.0, r * np.log(r), 0.0) + np.where(r < 1.0, (1.0 - r) * np.log1p(-r), 0.0)
        return float(np.sum(ent))

    def curvature_bound(self):
        return 0.25


class SquaredHinge(_BinaryLoss):
    """f(w) = sum max(1 - y * w, 0)^2."""

    def value(self, w):
        s = np.maximum(1.0 - self.y * self._check(w), 0.0)
        return float(s @ s)

    def gradient(self, w):
        s = np.maximum(1.0 - self.y * self._check(w), 0.0)
        return -2.0 * self.y * s

    def conjugate(self, u):
        s = self.y * self._check(u)
        if np.any(s > 0.0):
            return INF
        return float(np.sum(s + 0.25 * s * s))

    def curvature_bound(self):
        return 2.0


LOSSES: dict[str, type] = {cls.__name__: cls for cls in (LeastSquares, Logistic, SquaredHinge)}


def loss_from_json(obj: dict, y: NDArray) -> FittingLoss:
    """Build a loss from {"family": ...} plus the targets vector."""
    if not isinstance(obj, dict):
        raise ConfigError("loss: expected a JSON object")
    name = obj.get("family")
    cls = LOSSES.get(name)
    if cls is None:
        raise ConfigError(f"loss.family: unknown family {name!r}")
    if set(obj) != {"family"}:
        raise ConfigError(f"loss ({name}): unexpected fields {sorted(set(obj) - {'family'})}")
    return cls(y)
