"""Inner-solver behavior: line searches, guarantees, and trace accounting."""

import math

import numpy as np
import pytest

from restartopt import (
    DivergenceError,
    ProximalOracle,
    accelerated,
    bound_accelerated,
    bound_universal,
    gradient_descent,
    make_lasso,
    make_quadratic,
    make_sharp_norm,
    universal_fast_gradient,
)
from conftest import reference_optimum


def quadratic_oracle(A):
    return ProximalOracle(
        dimension=A.shape[0],
        value=lambda x: 0.5 * float(x @ (A @ x)),
        smooth_gradient=lambda x: A @ x,
    )


def half_norm_oracle(n):
    return ProximalOracle(
        dimension=n,
        value=lambda x: 0.5 * float(x @ x),
        smooth_gradient=lambda x: np.asarray(x, dtype=float),
    )


class TestGradientDescent:
    def test_one_step_hand_computation(self):
        # f = x^2/2 from x0 = 1 with L0 = 1: candidate 0 satisfies the
        # descent condition with equality, then the estimate halves
        oracle = half_norm_oracle(1)
        trace = gradient_descent(oracle, np.array([1.0]), 1.0, 1, f_star=0.0)
        assert trace.final_point[0] == 0.0
        assert trace.final_L_hat == 0.5
        assert trace.entries[0].f_value == 0.0

    def test_quadratic_pointwise_rate(self):
        # gap_t <= lambda_max d0^2 / t, with lambda_max from an eigendecomposition
        rng = np.random.default_rng(11)
        B = rng.standard_normal((20, 20))
        A = B @ B.T / 20 + 0.05 * np.eye(20)
        lam_max = float(np.linalg.eigvalsh(A)[-1])
        oracle = quadratic_oracle(A)
        x0 = rng.standard_normal(20)
        d0_sq = float(x0 @ x0)
        trace = gradient_descent(oracle, x0, 1.0, 200, f_star=0.0)
        for e in trace.entries:
            assert e.gap <= lam_max * d0_sq / e.iteration * (1 + 1e-9)

    def test_constant_objective_never_moves(self):
        oracle = ProximalOracle(
            dimension=3,
            value=lambda x: 4.2,
            smooth_gradient=lambda x: np.zeros(3),
        )
        x0 = np.array([1.0, -2.0, 0.5])
        trace = gradient_descent(oracle, x0, 1.0, 10)
        assert np.array_equal(trace.final_point, x0)
        assert all(e.f_value == 4.2 for e in trace.entries)

    def test_nan_objective_signals_divergence(self):
        oracle = ProximalOracle(
            dimension=1, value=lambda x: math.nan, smooth_gradient=lambda x: np.ones(1)
        )
        with pytest.raises(DivergenceError):
            gradient_descent(oracle, np.array([1.0]), 1.0, 5)

    def test_nan_gradient_signals_divergence(self):
        oracle = ProximalOracle(
            dimension=1,
            value=lambda x: float(x[0] ** 2),
            smooth_gradient=lambda x: np.full(1, math.nan),
        )
        with pytest.raises(DivergenceError):
            gradient_descent(oracle, np.array([1.0]), 1.0, 5)

    def test_oracle_call_accounting(self):
        # one gradient per step, one value per trial, plus the initial value
        inst = make_quadratic(12, 30.0, seed=1)
        trace = gradient_descent(inst.oracle, inst.x0, 0.01, 60, f_star=0.0)
        assert trace.n_grad == trace.accepted
        assert trace.n_value == 1 + trace.accepted + trace.backtracks
        assert trace.n_value + trace.n_grad <= 2 * trace.accepted + trace.backtracks + 1

    def test_validation(self):
        oracle = half_norm_oracle(2)
        with pytest.raises(ValueError):
            gradient_descent(oracle, np.zeros(2), 1.0, 0)
        with pytest.raises(ValueError):
            gradient_descent(oracle, np.zeros(2), -1.0, 5)


class TestAccelerated:
    def test_isotropic_quadratic_meets_rate_bound(self):
        oracle = half_norm_oracle(10)
        rng = np.random.default_rng(12)
        x0 = rng.standard_normal(10)
        x0 /= np.linalg.norm(x0)
        _, trace = accelerated(oracle, x0, 1.0, 20, f_star=0.0)
        assert trace.final_gap <= bound_accelerated(1.0, 1.0, 20) * (1 + 1e-9)

    def test_start_at_minimizer_stays(self):
        oracle = half_norm_oracle(4)
        y, trace = accelerated(oracle, np.zeros(4), 1.0, 1, f_star=0.0)
        assert trace.final_gap == 0.0
        assert np.array_equal(y, np.zeros(4))

    def test_ill_conditioned_pointwise_envelope(self):
        inst = make_quadratic(50, 1e4, seed=13)
        L = inst.regularity.L
        d0 = inst.x_star_distance(inst.x0)
        _, trace = accelerated(inst.oracle, inst.x0, 1.0, 500, f_star=0.0)
        for e in trace.entries:
            bound = bound_accelerated(L, d0, e.iteration)
            assert e.gap <= bound * (1 + 1e-9), e.iteration

    def test_least_squares_pointwise_envelope(self):
        from restartopt import make_least_squares, synthetic_regression

        A, b = synthetic_regression(80, 20, cond=500.0, seed=44)
        inst = make_least_squares(A, b)
        d0 = inst.x_star_distance(inst.x0)
        _, trace = accelerated(
            inst.oracle, inst.x0, 1.0, 300, f_star=inst.f_star
        )
        for e in trace.entries:
            bound = bound_accelerated(inst.regularity.L, d0, e.iteration)
            assert e.gap <= bound * (1 + 1e-9), e.iteration

    def test_estimate_never_exceeds_twice_lipschitz(self):
        inst = make_quadratic(30, 100.0, seed=14)
        _, trace = accelerated(inst.oracle, inst.x0, 1.0, 150, f_star=0.0)
        assert trace.max_L_hat <= 2 * inst.regularity.L

    def test_doubling_count_bounded(self):
        inst = make_quadratic(30, 100.0, seed=15)
        L0 = 0.125
        _, trace = accelerated(inst.oracle, inst.x0, L0, 150, f_star=0.0)
        cap = math.log2(2 * inst.regularity.L / L0) + trace.accepted
        assert trace.backtracks <= cap

    def test_gradient_calls_match_trials(self):
        inst = make_quadratic(15, 40.0, seed=16)
        _, trace = accelerated(inst.oracle, inst.x0, 1.0, 80, f_star=0.0)
        assert trace.n_grad == trace.accepted + trace.backtracks
        assert trace.n_value == 1 + 2 * trace.n_grad


class TestUniversal:
    def test_nonsmooth_reaches_target_within_analytic_count(self):
        # on f = |x| the universal method needs at most 4 L^2 d^2 / eps^2
        # iterations to certify f <= eps
        inst = make_sharp_norm(1, seed=0)
        x0 = np.array([0.2])
        eps = 0.1
        t_star = math.ceil(4 * 0.2**2 / eps**2)
        y, trace = universal_fast_gradient(
            inst.oracle, x0, eps, 1.0, 10 * t_star,
            stop=lambda p, f: f <= eps, f_star=0.0,
        )
        assert trace.final_f <= eps
        assert trace.accepted <= t_star

    def test_nonsmooth_pointwise_envelope(self):
        inst = make_sharp_norm(1, seed=0)
        x0 = np.array([0.2])
        for eps in (0.1, 0.01):
            _, trace = universal_fast_gradient(inst.oracle, x0, eps, 1.0, 2500, f_star=0.0)
            for e in trace.entries:
                bound = bound_universal(1.0, 1.0, 0.2, eps, e.iteration)
                assert e.f_value <= bound * (1 + 1e-9)

    def test_start_at_optimum_stays(self):
        oracle = half_norm_oracle(3)
        y, trace = universal_fast_gradient(oracle, np.zeros(3), 0.5, 1.0, 25, f_star=0.0)
        assert trace.final_gap == 0.0
        assert np.array_equal(y, np.zeros(3))

    def test_smooth_pointwise_envelope_with_positive_target(self):
        # quartic on the unit ball: s = 2 with L = 12 and nonzero accuracy
        from restartopt import make_norm_power

        inst = make_norm_power(10, 4.0, 1.0, seed=2)
        for eps in (1e-2, 1e-3):
            _, trace = universal_fast_gradient(
                inst.oracle, inst.x0, eps, 1.0, 400, f_star=0.0
            )
            for e in trace.entries:
                bound = bound_universal(2.0, 12.0, 1.0, eps, e.iteration)
                assert e.f_value <= bound * (1 + 1e-9), (eps, e.iteration)

    def test_composite_lasso_reaches_epsilon(self):
        rng = np.random.default_rng(17)
        A = rng.standard_normal((40, 30))
        b = rng.standard_normal(40) * 2
        inst = make_lasso(A, b, lam=1.0)
        f_star, tol = reference_optimum("lasso_40x30_seed17", inst)
        eps = 1e-3
        _, trace = universal_fast_gradient(inst.oracle, inst.x0, eps, 1.0, 3000)
        assert trace.final_f - f_star <= eps + tol

    def test_eps_target_recorded(self):
        inst = make_sharp_norm(2, seed=3)
        _, trace = universal_fast_gradient(inst.oracle, inst.x0, 0.25, 1.0, 10, f_star=0.0)
        assert all(e.eps_target == 0.25 for e in trace.entries)
        _, plain = accelerated(inst.oracle, inst.x0, 1.0, 5, f_star=0.0)
        assert all(e.eps_target is None for e in plain.entries)

    def test_warm_started_estimate_is_valid(self):
        inst = make_quadratic(10, 50.0, seed=18)
        _, first = accelerated(inst.oracle, inst.x0, 1.0, 40, f_star=0.0)
        y, second = accelerated(
            inst.oracle, first.final_point, first.final_L_hat, 40, f_star=0.0
        )
        assert second.final_gap < first.final_gap
        assert second.max_L_hat <= 2 * inst.regularity.L

    def test_trace_invariants(self):
        inst = make_quadratic(8, 25.0, seed=19)
        _, trace = accelerated(inst.oracle, inst.x0, 1.0, 30, f_star=0.0)
        trace.validate()
        iters = [e.iteration for e in trace.entries]
        assert iters == list(range(1, 31))

    def test_gap_none_without_f_star(self):
        inst = make_quadratic(8, 25.0, seed=19)
        _, trace = accelerated(inst.oracle, inst.x0, 1.0, 10)
        assert all(e.gap is None for e in trace.entries)
        assert trace.final_gap is None
        trace.validate()

    def test_nan_objective_signals_divergence(self):
        oracle = ProximalOracle(
            dimension=1, value=lambda x: math.nan, smooth_gradient=lambda x: np.ones(1)
        )
        with pytest.raises(DivergenceError):
            universal_fast_gradient(oracle, np.array([1.0]), 0.0, 1.0, 5)

    def test_nan_gradient_signals_divergence(self):
        oracle = ProximalOracle(
            dimension=1,
            value=lambda x: float(x[0] ** 2),
            smooth_gradient=lambda x: np.full(1, math.nan),
        )
        with pytest.raises(DivergenceError):
            universal_fast_gradient(oracle, np.array([1.0]), 0.0, 1.0, 5)

    def test_validation(self):
        oracle = half_norm_oracle(2)
        with pytest.raises(ValueError):
            universal_fast_gradient(oracle, np.zeros(2), -0.1, 1.0, 5)
        with pytest.raises(ValueError):
            universal_fast_gradient(oracle, np.zeros(2), 0.1, 1.0, 0)
