"""Level grids: the zero-solution threshold and warm-started path solves."""

import math

import numpy as np
import pytest

from sparsebnb.bnb import BnbOpts, Node
from sparsebnb.exceptions import ConfigError, DegenerateError
from sparsebnb.l0reg import L0Regularizer
from sparsebnb.losses import LeastSquares, Logistic, SquaredHinge
from sparsebnb.oracle import exhaustive_solve
from sparsebnb.path import PathSpec, _bisect_level, fit_path, lambda_max
from sparsebnb.penalties import (
    L1,
    L1L2,
    BigM,
    BigML1,
    BigML2,
    PositiveL1,
    PositiveL2,
    PowerP,
)
from sparsebnb.relaxation import Problem, SolveOpts, solve_relaxation

INF = math.inf


def with_penalty(p, pen, lam=1.0):
    return Problem(p.A, p.loss, L0Regularizer(lam, pen))


def random_ls(seed, m=18, n=7):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(m, n))
    y = rng.normal(size=m)
    return Problem(A, LeastSquares(y), L0Regularizer(1.0, BigM(M=2.0)))


def gradient_scales(p):
    c = p.A.T @ p.loss.gradient(np.zeros(p.m))
    return max(0.0, float(np.max(-c))), max(0.0, float(np.max(c)))


class TestLambdaMax:
    def test_bigm_closed_form(self):
        # max |A'y| = 3 with M = 2 puts the threshold at 6
        A = np.array([[1.0], [0.0]])
        y = np.array([3.0, 0.0])
        p = Problem(A, LeastSquares(y), L0Regularizer(1.0, BigM(M=2.0)))
        assert lambda_max(p) == pytest.approx(6.0, abs=1e-12)

    def test_powerp_square_closed_form(self):
        p = random_ls(0)
        t = max(gradient_scales(p))
        q = with_penalty(p, PowerP(sigma=1.5, p=2.0))
        assert lambda_max(q) == pytest.approx(t * t / (2.0 * 1.5), rel=1e-12)

    def test_flat_gradient_degenerate(self):
        A = np.array([[1.0, 2.0]])
        p = Problem(A, LeastSquares(np.array([0.0])), L0Regularizer(1.0, BigM(M=2.0)))
        with pytest.raises(DegenerateError):
            lambda_max(p)

    def test_constant_slope_families_degenerate(self):
        p = random_ls(1)
        t = max(gradient_scales(p))
        for pen in (L1(sigma=0.5 * t), L1(sigma=2.0 * t), PositiveL1(sigma=1.0)):
            with pytest.raises(DegenerateError):
                lambda_max(with_penalty(p, pen))

    def test_l1l2_needs_headroom_over_sigma(self):
        p = random_ls(2)
        t = max(gradient_scales(p))
        with pytest.raises(DegenerateError):
            lambda_max(with_penalty(p, L1L2(sigma=1.1 * t, sigma2=1.0)))
        lam = lambda_max(with_penalty(p, L1L2(sigma=0.25 * t, sigma2=0.7)))
        assert lam == pytest.approx((t - 0.25 * t) ** 2 / (2.0 * 0.7), rel=1e-12)

    @pytest.mark.parametrize(
        "pen",
        [
            BigM(M=1.7),
            PowerP(sigma=0.8, p=2.0),
            PowerP(sigma=0.8, p=3.0),
            L1L2(sigma=0.1, sigma2=0.9),
            BigML1(M=1.2, sigma=0.1),
            BigML2(M=50.0, sigma=1.0),  # threshold inside the sqrt regime
            BigML2(M=0.4, sigma=1.0),  # threshold in the linear regime
            PositiveL2(sigma=0.6),
        ],
    )
    def test_closed_form_matches_bisection(self, pen):
        p = random_ls(3)
        t_pos, t_neg = gradient_scales(p)
        if pen.one_sided:
            t_neg = 0.0
        closed = lambda_max(with_penalty(p, pen))
        assert closed == pytest.approx(_bisect_level(pen, t_pos, t_neg), rel=5e-10)

    @pytest.mark.parametrize("loss_kind", [0, 1, 2])
    @pytest.mark.parametrize(
        "pen",
        [BigM(M=2.0), L1L2(sigma=0.05, sigma2=1.0), PowerP(sigma=1.0, p=2.0), PositiveL2(sigma=0.5)],
    )
    def test_oracle_confirms_zero_just_above(self, loss_kind, pen):
        rng = np.random.default_rng(40 + loss_kind)
        A = rng.normal(size=(16, 6))
        if loss_kind == 0:
            loss = LeastSquares(rng.normal(size=16))
        else:
            y = rng.choice([-1.0, 1.0], size=16)
            loss = Logistic(y) if loss_kind == 1 else SquaredHinge(y)
        lam = lambda_max(Problem(A, loss, L0Regularizer(1.0, pen)))
        x, _ = exhaustive_solve(Problem(A, loss, L0Regularizer(1.001 * lam, pen)))
        assert np.all(x == 0.0)

    def test_one_sided_threshold_uses_the_signed_entry(self):
        # y > 0 makes A'grad f(0) strongly negative on column 0 and positive
        # on column 1; only the negative entry binds a one-sided penalty
        A = np.array([[1.0, -1.5], [1.0, -1.5], [0.5, -0.2]])
        y = np.array([2.0, 2.0, 1.0])
        pen = PositiveL2(sigma=0.8)
        p = Problem(A, LeastSquares(y), L0Regularizer(1.0, pen))
        c = A.T @ p.loss.gradient(np.zeros(3))
        t_pos = float(np.max(-c))
        assert t_pos < float(np.max(np.abs(c)))  # the two-sided value would differ
        lam = lambda_max(p)
        assert lam == pytest.approx(t_pos**2 / (2.0 * 0.8), rel=1e-12)
        root = Node(S0=frozenset(), S1=frozenset(), depth=0, lb=-INF, warm=np.zeros(2))
        tight = SolveOpts(cd_tol=1e-14, gap_tol=1e-11)
        f0 = p.loss.value(np.zeros(3))
        above = solve_relaxation(with_penalty(p, pen, 1.001 * lam), root, None, tight)
        assert above.primal == pytest.approx(f0, rel=1e-9)
        below = solve_relaxation(with_penalty(p, pen, 0.9 * lam), root, None, tight)
        assert below.primal < f0 - 1e-5


class TestPathSpec:
    def test_defaults(self):
        spec = PathSpec()
        assert spec.num_points == 20 and spec.ratio_min == 1e-2

    def test_validation(self):
        with pytest.raises(ConfigError):
            PathSpec(num_points=0)
        with pytest.raises(ConfigError):
            PathSpec(num_points=2.5)
        with pytest.raises(ConfigError):
            PathSpec(ratio_min=0.0)
        with pytest.raises(ConfigError):
            PathSpec(ratio_min=1.5)


class TestFitPath:
    def test_single_point_is_zero_at_the_threshold(self):
        p = random_ls(4)
        res = fit_path(p, PathSpec(num_points=1))
        assert len(res) == 1
        lam, sol = res[0]
        assert lam == pytest.approx(lambda_max(p), rel=1e-12)
        assert np.all(sol.x_opt == 0.0)
        assert sol.status == "Optimal"

    def test_three_point_grid_is_decades(self):
        p = random_ls(5)
        lams = [lam for lam, _ in fit_path(p, PathSpec(num_points=3, ratio_min=1e-2))]
        top = lambda_max(p)
        assert lams == pytest.approx([top, 0.1 * top, 0.01 * top], rel=1e-12)

    def test_grid_ratios_constant(self):
        p = random_ls(6)
        lams = [lam for lam, _ in fit_path(p, PathSpec(num_points=9, ratio_min=2e-3))]
        ratios = [b / a for a, b in zip(lams, lams[1:])]
        for r in ratios:
            assert r == pytest.approx(ratios[0], rel=1e-12)

    def test_warm_chain_and_objective_decrease(self):
        p = random_ls(7)
        res = fit_path(p, PathSpec(num_points=6))
        assert np.all(res[0][1].x_opt == 0.0)
        for (_, prev), (lam, sol) in zip(res, res[1:]):
            p_k = Problem(p.A, p.loss, L0Regularizer(lam, p.reg.penalty))
            # the previous optimizer was fed as the initial incumbent
            assert sol.objective <= p_k.objective(prev.x_opt) + 1e-12
            assert sol.status == "Optimal"

    def test_support_grows_as_level_falls(self):
        rng = np.random.default_rng(8)
        A = rng.normal(size=(25, 9))
        x_true = np.zeros(9)
        x_true[[2, 5, 6]] = [1.5, -1.0, 0.8]
        y = A @ x_true + 0.05 * rng.normal(size=25)
        p = Problem(A, LeastSquares(y), L0Regularizer(1.0, L1L2(sigma=0.1, sigma2=0.5)))
        res = fit_path(p, PathSpec(num_points=8, ratio_min=1e-3))
        nnz = [int(np.count_nonzero(sol.x_opt)) for _, sol in res]
        assert nnz[0] == 0
        assert nnz[-1] >= 3
        assert all(s == "Optimal" for _, sol in res for s in [sol.status])

    def test_solver_options_are_forwarded(self):
        p = random_ls(9)
        res = fit_path(p, PathSpec(num_points=4, solve=BnbOpts(node_limit=0)))
        assert all(sol.status == "NodeLimit" for _, sol in res)
        # the path records non-Optimal statuses and keeps going
        assert len(res) == 4

    def test_degenerate_data_propagates(self):
        A = np.array([[1.0, 1.0]])
        p = Problem(A, LeastSquares(np.array([0.0])), L0Regularizer(1.0, BigM(M=2.0)))
        with pytest.raises(DegenerateError):
            fit_path(p, PathSpec(num_points=2))
