import math

import numpy as np
import pytest

from helpers import ZeroPenalty, domain_radius, sample_domain_point, sample_penalty
from oracles import fd_slope, golden_prox, grid_conjugate
from sparsebnb.exceptions import ConfigError, DomainError
from sparsebnb.l0reg import L0Regularizer, regularizer_from_json
from sparsebnb.penalties import BigM, L1, PositiveL1, PositiveL2, PowerP

INF = math.inf

BIGM = L0Regularizer(lam=2.0, penalty=BigM(M=1.0))  # tau=2, mu=1, kappa=inf
POW = L0Regularizer(lam=2.0, penalty=PowerP(sigma=2.0, p=2.0))  # tau=sqrt8, mu=sqrt2
LASSO = L0Regularizer(lam=1.0, penalty=L1(sigma=3.0))  # tau=3, mu=inf


def random_reg(rng):
    return L0Regularizer(lam=float(rng.uniform(0.05, 4.0)), penalty=sample_penalty(rng))


class TestGValue:
    def test_origin(self):
        assert BIGM.g_value(0.0) == 0.0

    def test_bigm_inside(self):
        assert BIGM.g_value(0.5) == 2.0

    def test_l1(self):
        assert LASSO.g_value(-2.0) == 7.0

    def test_outside_domain(self):
        assert BIGM.g_value(1.5) == INF


class TestBiconjValue:
    def test_linear_branch(self):
        assert BIGM.biconj_value(0.5) == 1.0

    def test_penalty_branch(self):
        assert POW.biconj_value(2.0) == 6.0

    def test_origin(self):
        assert POW.biconj_value(0.0) == 0.0

    def test_outside_domain(self):
        assert BIGM.biconj_value(-1.5) == INF

    def test_one_sided_negative_axis(self):
        r = L0Regularizer(lam=1.0, penalty=PositiveL1(sigma=0.8))
        assert r.biconj_value(-0.3) == INF
        assert r.biconj_value(0.3) == pytest.approx(0.8 * 0.3)

    def test_lower_bounds_g_with_equality_past_mu(self):
        rng = np.random.default_rng(41)
        for _ in range(200):
            r = random_reg(rng)
            x = sample_domain_point(rng, r.penalty)
            lo, g = r.biconj_value(x), r.g_value(x)
            assert lo <= g + 1e-12 * max(1.0, abs(g))
            if abs(x) >= r.params.mu or x == 0.0:
                assert lo == pytest.approx(g, abs=1e-12)


class TestBiconjSubdiff:
    def test_at_origin(self):
        iv = BIGM.biconj_subdiff(0.0)
        assert (iv.lo, iv.hi) == (-2.0, 2.0)

    def test_at_breakpoint_smooth(self):
        iv = POW.biconj_subdiff(math.sqrt(2.0))
        s8 = math.sqrt(8.0)
        assert iv.lo == pytest.approx(s8) and iv.hi == pytest.approx(s8)

    def test_at_breakpoint_box(self):
        iv = BIGM.biconj_subdiff(1.0)
        assert (iv.lo, iv.hi) == (2.0, INF)

    def test_outside_domain(self):
        with pytest.raises(DomainError):
            BIGM.biconj_subdiff(1.01)

    def test_one_sided_origin(self):
        r = L0Regularizer(lam=1.0, penalty=PositiveL2(sigma=1.7))
        iv = r.biconj_subdiff(0.0)
        assert iv.lo == -INF and iv.hi == pytest.approx(math.sqrt(2 * 1.7))

    def test_monotone_intervals(self):
        rng = np.random.default_rng(43)
        for _ in range(200):
            r = random_reg(rng)
            a = sample_domain_point(rng, r.penalty)
            b = sample_domain_point(rng, r.penalty)
            if a == b:
                continue
            a, b = min(a, b), max(a, b)
            assert r.biconj_subdiff(a).hi <= r.biconj_subdiff(b).lo + 1e-12

    def test_subgradient_inequality(self):
        rng = np.random.default_rng(47)
        for _ in range(300):
            r = random_reg(rng)
            x0 = sample_domain_point(rng, r.penalty)
            iv = r.biconj_subdiff(x0)
            cands = [s for s in (iv.lo, iv.hi) if math.isfinite(s)]
            if not cands:
                continue
            s = cands[int(rng.integers(len(cands)))]
            x = sample_domain_point(rng, r.penalty)
            assert r.biconj_value(x) >= r.biconj_value(x0) + s * (x - x0) - 1e-10


class TestBiconjProx:
    def test_dead_zone(self):
        # golden-section oracle: -5.6e-17
        assert BIGM.biconj_prox(1.0, 1.5) == 0.0

    def test_origin(self):
        assert BIGM.biconj_prox(1.0, 0.0) == 0.0

    def test_far_branch(self):
        # golden-section oracle: 3.3333333135
        assert POW.biconj_prox(1.0, 10.0) == pytest.approx(10.0 / 3.0, abs=1e-12)

    def test_matches_golden_section(self):
        rng = np.random.default_rng(53)
        for _ in range(60):
            r = random_reg(rng)
            gamma = float(rng.uniform(0.05, 3.0))
            x = float(rng.uniform(-6.0, 6.0))
            rad = domain_radius(r.penalty) + 2.0
            u_ref = golden_prox(r.biconj_value, gamma, x, -rad, rad)
            assert r.biconj_prox(gamma, x) == pytest.approx(u_ref, abs=1e-6)

    def test_fermat(self):
        rng = np.random.default_rng(59)
        for _ in range(300):
            r = random_reg(rng)
            gamma = float(rng.uniform(0.05, 3.0))
            x = float(rng.uniform(-6.0, 6.0))
            u = r.biconj_prox(gamma, x)
            assert r.biconj_subdiff(u).contains((x - u) / gamma, tol=1e-9)


class TestConjValue:
    def test_origin(self):
        assert BIGM.conj_value(0.0) == 0.0

    def test_positive_part(self):
        # grid-sup oracle of vx - g_value(x): 1.0
        assert BIGM.conj_value(3.0) == 1.0

    def test_zero_up_to_tau(self):
        assert BIGM.conj_value(2.0) == 0.0
        assert BIGM.conj_value(2.0 + 1e-9) > 0.0

    def test_matches_grid_sup(self):
        rng = np.random.default_rng(61)
        for _ in range(40):
            r = random_reg(rng)
            beta = r.params.beta
            v = float(rng.uniform(-min(beta, 4.0), min(beta, 4.0)))
            truth = r.conj_value(v)
            if math.isinf(truth):
                continue
            rad = domain_radius(r.penalty) + 2.0
            est = grid_conjugate(r.g_value, v, -rad, rad)
            assert abs(truth - est) <= 2e-3


class TestConjSubdiff:
    def test_inside(self):
        iv = BIGM.conj_subdiff(1.0)
        assert (iv.lo, iv.hi) == (0.0, 0.0)

    def test_at_tau(self):
        iv = BIGM.conj_subdiff(2.0)
        assert (iv.lo, iv.hi) == (0.0, 1.0)

    def test_beyond_tau(self):
        # fd on conj_value: 0.99999999836 both sides
        iv = BIGM.conj_subdiff(3.0)
        assert (iv.lo, iv.hi) == (1.0, 1.0)

    def test_outside_domain(self):
        with pytest.raises(DomainError):
            LASSO.conj_subdiff(3.5)

    def test_zero_penalty_harness(self):
        r = L0Regularizer(lam=2.0, penalty=ZeroPenalty())
        iv = r.conj_subdiff(0.0)
        assert (iv.lo, iv.hi) == (-INF, INF)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(67)
        for _ in range(40):
            r = random_reg(rng)
            beta = r.params.beta
            v = float(rng.uniform(-0.99 * min(beta, 4.0), 0.99 * min(beta, 4.0)))
            iv = r.conj_subdiff(v)
            left, right = fd_slope(r.conj_value, v, -1), fd_slope(r.conj_value, v, +1)
            if math.isfinite(left):
                assert abs(left - iv.lo) <= 1e-4 * max(1.0, abs(iv.lo))
            if math.isfinite(right):
                assert abs(right - iv.hi) <= 1e-4 * max(1.0, abs(iv.hi))


class TestConjProx:
    def test_origin(self):
        assert BIGM.conj_prox(1.0, 0.0) == 0.0

    def test_clamp_branch(self):
        # golden-section oracle: 2.0
        assert BIGM.conj_prox(1.0, 2.5) == 2.0

    def test_identity_branch(self):
        assert LASSO.conj_prox(1.0, 2.0) == 2.0

    def test_matches_golden_section(self):
        rng = np.random.default_rng(71)
        for _ in range(60):
            r = random_reg(rng)
            gamma = float(rng.uniform(0.05, 3.0))
            beta = r.params.beta
            v = float(rng.uniform(-min(beta, 6.0), min(beta, 6.0)))
            u_ref = golden_prox(r.conj_value, gamma, v, -min(beta, 8.0), min(beta, 8.0))
            assert r.conj_prox(gamma, v) == pytest.approx(u_ref, abs=1e-6)

    def test_fermat(self):
        rng = np.random.default_rng(73)
        for _ in range(300):
            r = random_reg(rng)
            gamma = float(rng.uniform(0.05, 3.0))
            beta = r.params.beta
            v = float(rng.uniform(-min(beta, 6.0), min(beta, 6.0)))
            u = r.conj_prox(gamma, v)
            assert r.conj_subdiff(u).contains((v - u) / gamma, tol=1e-9)

    def test_moreau_identity(self):
        rng = np.random.default_rng(79)
        for _ in range(300):
            r = random_reg(rng)
            gamma = float(rng.uniform(0.05, 3.0))
            x = float(rng.uniform(-6.0, 6.0))
            lhs = r.biconj_prox(gamma, x)
            rhs = x - gamma * r.conj_prox(1.0 / gamma, x / gamma)
            assert lhs == pytest.approx(rhs, abs=1e-9)


class TestConstructionAndJson:
    def test_rejects_bad_lambda(self):
        for lam in (0.0, -1.0, INF):
            with pytest.raises(ConfigError):
                L0Regularizer(lam=lam, penalty=BigM(M=1.0))

    def test_params_cache_coherence(self):
        assert BIGM.params == BigM(M=1.0).compute_params(2.0)

    def test_json_round_trip(self):
        r2 = regularizer_from_json(BIGM.to_json())
        assert r2.lam == BIGM.lam and r2.penalty == BIGM.penalty

    def test_json_shape_errors(self):
        with pytest.raises(ConfigError):
            regularizer_from_json({"lambda": 1.0})
        with pytest.raises(ConfigError):
            regularizer_from_json({"lambda": 1.0, "penalty": {"family": "L1", "sigma": 1.0}, "x": 1})
