"""Ground-truth utilities: exhaustive small-n solver and synthetic generators.

The exhaustive solver enumerates supports in Gray-code order so each
restricted solve warm-starts from a neighbor differing in one coordinate.
The generator draws design rows from an AR(1)-correlated Gaussian and a
Bernoulli-mixture signal, and the density-to-penalty map turns the MAP
estimation problem into the penalized form the solver accepts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .exceptions import ConfigError, DomainError, NumericalError, SizeError
from .l0reg import L0Regularizer
from .losses import LeastSquares, Logistic, SquaredHinge
from .penalties import L1, L1L2, PenaltyModel, PositiveL1, PositiveL2, PowerP
from .relaxation import Problem

INF = float("inf")

_GAP_TOL = 1e-10
_MOVE_TOL = 1e-13
_MAX_SWEEPS = 100_000


def restricted_solve(p: Problem, support) -> tuple:
    """Minimize f(Ax) + sum_{i in S} h(x_i) with x zero off S; price the l0 term exactly."""
    support = set(support)
    if not support <= set(range(p.n)):
        raise ConfigError(f"support {sorted(support - set(range(p.n)))} out of range")
    x = _restricted(p, support, None)
    return x, p.objective(x)


def _sh_line_min(pen: PenaltyModel, xi: float, q: NDArray, r: NDArray) -> float:
    """Exact minimizer of sum_j max(r_j - t*q_j, 0)^2 + pen(xi + t) over u = xi + t.

    The fit term is piecewise quadratic in t with breakpoints r_j/q_j; within
    an interval the minimizer is a single penalty prox, so scan intervals
    outward from t = 0 until the prox answer lands inside its own interval.
    """
    nz = np.abs(q) > 0.0
    qn, rn = q[nz], r[nz]
    order = np.argsort(rn / qn)
    qn, rn = qn[order], rn[order]
    tb = rn / qn
    K = tb.size
    k = int(np.searchsorted(tb, 0.0, side="right"))
    act = rn > 0.0
    S1 = float(qn[act] @ rn[act])
    S2 = float(qn[act] @ qn[act])
    lo = float(tb[k - 1]) if k >= 1 else -INF
    hi = float(tb[k]) if k < K else INF
    for _ in range(2 * K + 4):
        if S2 > 0.0:
            H = 2.0 * S2
            u = pen.prox(1.0 / H, xi + S1 / S2)
        else:
            u = 0.0  # fit flat here; every shipped penalty has its minimum at 0
        t = u - xi
        slack = 1e-15 * (1.0 + abs(t))
        if lo - slack <= t <= hi + slack:
            return u
        if t > hi:
            j, k = k, k + 1
            if qn[j] > 0.0:
                S1 -= qn[j] * rn[j]
                S2 -= qn[j] * qn[j]
            else:
                S1 += qn[j] * rn[j]
                S2 += qn[j] * qn[j]
            lo, hi = float(tb[j]), (float(tb[k]) if k < K else INF)
        else:
            j = k - 1
            k = j
            if qn[j] > 0.0:
                S1 += qn[j] * rn[j]
                S2 += qn[j] * qn[j]
            else:
                S1 -= qn[j] * rn[j]
                S2 -= qn[j] * qn[j]
            hi, lo = float(tb[j]), (float(tb[k - 1]) if k >= 1 else -INF)
    return u


def _pen_local_quad(pen: PenaltyModel, xi: float) -> tuple | None:
    """(h'(xi), h''(xi)) of the smooth piece under xi, or None at kinks/walls.

    The curvature comes from differencing the subdifferential, which is exact
    while h' is piecewise linear and merely approximate otherwise; callers
    must treat the resulting model as a proposal.
    """
    if xi == 0.0:
        return None
    eps = 1e-6 * (1.0 + abs(xi))
    if (xi - eps) * xi <= 0.0:
        return None
    try:
        mid = pen.subdiff(xi)
        left = pen.subdiff(xi - eps)
        right = pen.subdiff(xi + eps)
    except DomainError:
        return None
    if not (mid.is_point and left.is_point and right.is_point):
        return None
    h2 = (right.lo - left.lo) / (2.0 * eps)
    return float(mid.lo), max(0.0, float(h2))


def _restricted(p: Problem, support, warm) -> NDArray:
    """Support-restricted coordinate descent to a 1e-10 duality gap.

    Visits minimize each coordinate exactly where the loss allows it: least
    squares in one prox step, squared hinge by breakpoint scan. Logistic
    visits take safe majorization steps and switch to a damped local
    second-order step when the safe step crawls; the global step alone
    stalls wherever saturation leaves most of the curvature bound unused.
    """
    n, A, pen = p.n, p.A, p.reg.penalty
    loss = p.loss
    x = np.zeros(n) if warm is None else np.array(warm, dtype=float)
    coords = [i for i in sorted(support) if p.column_norms[i] > 0.0]
    keep = set(coords)
    for i in range(n):
        if i not in keep:
            x[i] = 0.0
    if not coords:
        return x
    L = loss.curvature_bound()
    nd = len(coords)
    cols = [A[:, i].copy() for i in coords]
    safes = [1.0 / (L * p.column_norms[i]) for i in coords]
    grad = loss.gradient
    w = A @ x
    fit = None  # cached loss fit value; None once the sweep state moved off it
    # a coordinate that was visited and did not move can only move again
    # after some other coordinate moves, so sweeps skip clean coordinates
    dirty = bytearray(b"\x01" * nd)
    ALL_DIRTY = b"\x01" * nd

    def soil(k: int) -> None:
        dirty[:] = ALL_DIRTY
        dirty[k] = 0

    if isinstance(loss, LeastSquares):
        # visits never touch sample space: the Gram matrix prices a
        # coordinate move in s flops, and the step is the exact minimizer
        As = A[:, coords]
        G = As.T @ As
        Aty = As.T @ loss.y
        cvec = G @ x[coords] - Aty

        def resync() -> None:
            nonlocal cvec
            cvec = G @ x[coords] - Aty

        def model() -> tuple:
            return cvec, G

        def sweep() -> float:
            nonlocal cvec
            mv = 0.0
            for k, (i, gsafe) in enumerate(zip(coords, safes)):
                if not dirty[k]:
                    continue
                dirty[k] = 0
                xi = float(x[i])
                u = pen.prox(gsafe, xi - gsafe * float(cvec[k]))
                if u != xi:
                    cvec = cvec + (u - xi) * G[:, k]
                    x[i] = u
                    mv = max(mv, abs(u - xi))
                    soil(k)
            return mv

    elif isinstance(loss, SquaredHinge):
        yv = loss.y
        qs = [yv * a for a in cols]
        Qm = np.column_stack(qs)
        rvec = 1.0 - yv * w

        def resync() -> None:
            nonlocal rvec
            rvec = 1.0 - yv * w

        def model() -> tuple:
            act = rvec > 0.0
            Qa = Qm[act]
            return -2.0 * (Qa.T @ rvec[act]), 2.0 * (Qa.T @ Qa)

        def sweep() -> float:
            nonlocal rvec, fit
            mv = 0.0
            for k, (i, q, gsafe) in enumerate(zip(coords, qs, safes)):
                if not dirty[k]:
                    continue
                dirty[k] = 0
                xi = float(x[i])
                u = _sh_line_min(pen, xi, q, rvec)
                d = u - xi
                if d == 0.0:
                    continue
                rn = rvec - d * q
                rp = np.maximum(rn, 0.0)
                fit_n = float(rp @ rp)
                if fit is None:
                    r0 = np.maximum(rvec, 0.0)
                    fit = float(r0 @ r0)
                # belt against drift in the scanned sums
                if fit_n + pen.value(u) <= fit + pen.value(xi) + 1e-12 * (1.0 + fit):
                    rvec, fit = rn, fit_n
                    x[i] = u
                    mv = max(mv, abs(d))
                    soil(k)
                else:
                    g = -2.0 * float(q @ np.maximum(rvec, 0.0))
                    u = pen.prox(gsafe, xi - gsafe * g)
                    if u != xi:
                        rvec = rvec - (u - xi) * q
                        x[i] = u
                        fit = None
                        mv = max(mv, abs(u - xi))
                        dirty[:] = ALL_DIRTY  # the safe step is not exact
            return mv

    elif isinstance(loss, Logistic):
        yv = loss.y
        qs = [yv * a for a in cols]
        q2s = [q * q for q in qs]
        Qm = np.column_stack(qs)
        damps = [0.01 * L * p.column_norms[i] for i in coords]
        tvec = yv * w

        def resync() -> None:
            nonlocal tvec
            tvec = yv * w

        def model() -> tuple:
            with np.errstate(over="ignore"):
                sig = 1.0 / (1.0 + np.exp(tvec))
            curv = sig - sig * sig
            return -(Qm.T @ sig), Qm.T @ (Qm * curv[:, None])

        def sweep() -> float:
            nonlocal tvec, fit
            mv = 0.0
            with np.errstate(over="ignore"):
                for k, (i, q, q2, gsafe, damp) in enumerate(zip(coords, qs, q2s, safes, damps)):
                    if not dirty[k]:
                        continue
                    dirty[k] = 0
                    xi = float(x[i])
                    # sigmoid(-margin); exp overflow saturates to the correct 0
                    sig = 1.0 / (1.0 + np.exp(tvec))
                    g = -float(q @ sig)
                    # pointwise curvature sig*(1-sig) collapses under
                    # saturation, so the safe global step would crawl here
                    H = float(q2 @ (sig - sig * sig)) + damp
                    u = pen.prox(1.0 / H, xi - g / H)
                    d = u - xi
                    if d == 0.0:
                        continue
                    if fit is None:
                        fit = float(np.logaddexp(0.0, -tvec).sum())
                    fcur = fit + pen.value(xi)
                    # halve toward xi until monotone; curvature grows along
                    # steps that desaturate samples, so full steps overshoot
                    accepted = False
                    for _ in range(12):
                        tn = tvec + d * q
                        fit_n = float(np.logaddexp(0.0, -tn).sum())
                        if fit_n + pen.value(xi + d) <= fcur:
                            accepted = True
                            break
                        d *= 0.5
                    if accepted:
                        tvec, fit = tn, fit_n
                        x[i] = xi + d
                        mv = max(mv, abs(d))
                    else:
                        u = pen.prox(gsafe, xi - gsafe * g)
                        if u == xi:
                            continue
                        tvec = tvec + (u - xi) * q
                        x[i] = u
                        fit = None
                        mv = max(mv, abs(u - xi))
                    # the local step is inexact, so the mover stays dirty
                    dirty[:] = ALL_DIRTY
            return mv

    else:
        # unknown loss: global majorization steps, nothing loss-specific
        model = None

        def resync() -> None:
            pass

        def sweep() -> float:
            nonlocal w
            mv = 0.0
            for k, (i, a, gsafe) in enumerate(zip(coords, cols, safes)):
                if not dirty[k]:
                    continue
                dirty[k] = 0
                for _ in range(6):
                    xi = float(x[i])
                    u = pen.prox(gsafe, xi - gsafe * float(a @ grad(w)))
                    d = u - xi
                    if d == 0.0:
                        break
                    w = w + d * a
                    x[i] = u
                    mv = max(mv, abs(d))
                    dirty[:] = ALL_DIRTY
                    if abs(d) <= 1e-13 * max(1.0, abs(u)):
                        break
            return mv

    def polish(primal: float) -> bool:
        """One safeguarded Newton step on the current smooth pattern.

        Coordinate descent closes the last decades of the gap at a linear
        rate; solving the free-coordinate quadratic model directly collapses
        that tail. A wrong pattern guess just fails the decrease test.
        """
        nonlocal w, fit
        sel = []
        h1 = []
        h2 = []
        for k, i in enumerate(coords):
            lq = _pen_local_quad(pen, float(x[i]))
            if lq is not None:
                sel.append(k)
                h1.append(lq[0])
                h2.append(lq[1])
        if not sel:
            return False
        gvec, H = model()
        gs = gvec[sel] + np.array(h1)
        Hs = H[np.ix_(sel, sel)] + np.diag(h2)
        try:
            d = np.linalg.solve(Hs, -gs)
        except np.linalg.LinAlgError:
            return False
        if not np.all(np.isfinite(d)):
            return False
        moved = [coords[k] for k in sel]
        xs = x[moved].copy()
        for _ in range(8):
            x[moved] = xs + d
            fnew = loss.value(A @ x) + sum(pen.value(float(x[i])) for i in coords)
            if fnew < primal - 1e-14 * (1.0 + abs(primal)):
                w = A @ x
                resync()
                fit = None
                dirty[:] = ALL_DIRTY
                return True
            d *= 0.5
        x[moved] = xs
        return False

    next_check = 1
    for it in range(1, _MAX_SWEEPS + 1):
        max_move = sweep()
        stalled = max_move < _MOVE_TOL
        if it >= next_check or stalled:
            w = A @ x  # shed incremental drift before judging the gap
            resync()
            fit = None
            dirty[:] = ALL_DIRTY
            primal = loss.value(w) + sum(pen.value(float(x[i])) for i in coords)
            if not math.isfinite(primal):
                raise NumericalError("restricted objective became non-finite")
            v = -grad(w)
            dual = -loss.conjugate(-v)
            if math.isfinite(dual):
                c = A.T @ v
                for i in coords:
                    dual -= pen.conjugate(float(c[i]))
                    if math.isinf(dual):
                        break
            if math.isfinite(dual) and primal - dual <= _GAP_TOL * max(1.0, abs(primal)):
                break
            if it >= 4 and model is not None and polish(primal):
                stalled = False
                next_check = it + 1
            else:
                next_check = it + (1 if it < 4 else 8)
        if stalled:
            break
    return x


def exhaustive_solve(p: Problem, max_n: int = 16) -> tuple:
    """Enumerate all supports (Gray-code order, warm-started); the bnb cross-check."""
    n = p.n
    if n > max_n:
        raise SizeError(f"n={n} exceeds the exhaustive limit {max_n}")
    best_x = np.zeros(n)
    best_obj = p.objective(best_x)
    support = set()
    x = np.zeros(n)
    for k in range(1, 1 << n):
        gray = k ^ (k >> 1)
        flip = (gray ^ ((k - 1) ^ ((k - 1) >> 1))).bit_length() - 1
        if flip in support:
            support.remove(flip)
            x[flip] = 0.0
        else:
            support.add(flip)
        x = _restricted(p, support, x)
        obj = p.objective(x)
        if obj < best_obj:
            best_obj, best_x = obj, x.copy()
    return best_x, best_obj


DENSITY_KINDS = ("Normal", "Laplace", "Exponential", "HalfNormal", "GaussLaplace")


@dataclass(frozen=True)
class Density:
    """Amplitude density for the Bernoulli mixture; gamma2 only for GaussLaplace."""

    kind: str
    gamma: float = 1.0
    gamma2: float | None = None

    def __post_init__(self):
        if self.kind not in DENSITY_KINDS:
            raise ConfigError(f"unknown density {self.kind!r}; choose one of {DENSITY_KINDS}")
        if not (isinstance(self.gamma, (int, float)) and self.gamma > 0 and math.isfinite(self.gamma)):
            raise ConfigError("gamma must be a positive finite number")
        if self.kind == "GaussLaplace":
            if self.gamma2 is None or not (self.gamma2 > 0 and math.isfinite(self.gamma2)):
                raise ConfigError("GaussLaplace needs a positive finite gamma2")
        elif self.gamma2 is not None:
            raise ConfigError(f"{self.kind} takes no gamma2")

    def sample(self, rng: np.random.Generator, size: int) -> NDArray:
        g = self.gamma
        if self.kind == "Normal":
            return rng.normal(0.0, g, size)
        if self.kind == "Laplace":
            return rng.laplace(0.0, g, size)
        if self.kind == "Exponential":
            return rng.exponential(g, size)
        if self.kind == "HalfNormal":
            return np.abs(rng.normal(0.0, g, size))
        # GaussLaplace: propose from the Gaussian factor, accept on the Laplace one
        out = np.empty(size)
        for i in range(size):
            while True:
                cand = rng.normal(0.0, g)
                if rng.uniform() <= math.exp(-abs(cand) / self.gamma2):
                    out[i] = cand
                    break
        return out


def gen_bernoulli_mixture(m: int = 500, n: int = 1000, bernoulli_p: float = 0.01,
                          rho: float = 0.9, density: Density = Density("Normal"),
                          snr: float = 10.0, seed: int = 0) -> tuple:
    """Draw (A, y, x_true, zeta): AR(1) design rows, spike-and-slab signal, Gaussian noise."""
    if not (isinstance(m, int) and isinstance(n, int) and m >= 1 and n >= 1):
        raise ConfigError("m and n must be positive integers")
    if not 0.0 < bernoulli_p < 1.0:
        raise ConfigError("bernoulli_p must lie in (0, 1)")
    if not 0.0 <= rho <= 1.0:
        raise ConfigError("rho must lie in [0, 1]")
    if not (snr > 0 and math.isfinite(snr)):
        raise ConfigError("snr must be positive and finite")

    rng = np.random.default_rng(seed)
    z = rng.standard_normal((m, n))
    A = np.empty((m, n))
    A[:, 0] = z[:, 0]
    c = math.sqrt(1.0 - rho * rho)
    for j in range(1, n):
        A[:, j] = rho * A[:, j - 1] + c * z[:, j]

    b = rng.uniform(size=n) < bernoulli_p
    s = density.sample(rng, n)
    x_true = np.where(b, s, 0.0)

    signal = A @ x_true
    norm = float(np.linalg.norm(signal))
    if norm == 0.0:
        raise ConfigError("zero signal: no active coordinate was drawn (raise bernoulli_p or reseed)")
    zeta = norm / math.sqrt(snr * m)
    y = signal + zeta * rng.standard_normal(m)
    return A, y, x_true, zeta


def map_penalty_from_density(density: Density, zeta: float, bernoulli_p: float) -> tuple:
    """MAP correspondence: penalty h = -zeta^2 log(phi/phi_max), lambda = zeta^2 log((1-p)/p)."""
    if not (zeta > 0 and math.isfinite(zeta)):
        raise ConfigError("zeta must be positive and finite")
    if not 0.0 < bernoulli_p < 0.5:
        raise ConfigError("bernoulli_p must lie in (0, 0.5) so the sparsity weight is positive")
    z2, g = zeta * zeta, density.gamma
    lam = z2 * math.log((1.0 - bernoulli_p) / bernoulli_p)
    if density.kind == "Normal":
        return PowerP(sigma=z2 / (g * g), p=2.0), lam
    if density.kind == "Laplace":
        return L1(sigma=z2 / g), lam
    if density.kind == "Exponential":
        return PositiveL1(sigma=z2 / g), lam
    if density.kind == "HalfNormal":
        return PositiveL2(sigma=z2 / (g * g)), lam
    return L1L2(sigma=z2 / density.gamma2, sigma2=z2 / (g * g)), lam


def mixture_problem(m: int, n: int, bernoulli_p: float, rho: float, density: Density,
                    snr: float, seed: int) -> tuple:
    """Generate an instance and assemble the matching MAP Problem."""
    A, y, x_true, zeta = gen_bernoulli_mixture(m, n, bernoulli_p, rho, density, snr, seed)
    pen, lam = map_penalty_from_density(density, zeta, bernoulli_p)
    return Problem(A, LeastSquares(y), L0Regularizer(lam, pen)), x_true, zeta
