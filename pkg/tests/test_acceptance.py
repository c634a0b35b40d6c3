"""Acceptance criteria: every guarantee checked at its stated tolerance.

Each test prints one PASS line (visible with ``pytest -s``) after its
assertions. Quantitative checks compare runs against the closed-form
envelopes; bound violations are tolerated only within 1e-9 relative
slack. Wall-clock budgets are asserted per criterion.
"""

import math
import time

import numpy as np

from restartopt import (
    accelerated,
    adaptive_grid,
    bound_accelerated,
    bound_adaptive,
    bound_holder,
    bound_rounded,
    bound_smooth,
    bound_universal,
    check_sharpness_bound,
    check_suboptimality_upper_bound,
    criterion_restart,
    derive_conditioning,
    gradient_finite_difference_error,
    make_least_squares,
    make_norm_power,
    make_quadratic,
    make_sharp_norm,
    optimal_schedule_smooth,
    restart_count,
    restart_scheduled,
    sample_validation_points,
    schedule_threshold,
    schedule_total,
    synthetic_regression,
    ufgm_constant,
    universal_fast_gradient,
)
from restartopt.cli import main as cli_main

REL_SLACK = 1 + 1e-9


class Timer:
    def __init__(self, budget_seconds):
        self.budget = budget_seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.budget, (
                f"runtime {self.elapsed:.1f}s exceeded budget {self.budget}s"
            )


def test_criterion_1_bound_dominance_tau0():
    with Timer(5.0) as t:
        inst = make_quadratic(50, 100.0, seed=0)
        cond = derive_conditioning(inst.regularity)
        gap0 = inst.gap0()
        schedule = optimal_schedule_smooth(cond, gap0, 4.0)
        cycles = 12
        budget = cycles * schedule.iterations(1)
        trace = restart_scheduled(inst.oracle, inst.x0, schedule, budget, 1.0, f_star=0.0)

        checkpoints = trace.restart_entries() + [trace.entries[-1]]
        assert len(checkpoints) == cycles
        for k, entry in enumerate(checkpoints, start=1):
            assert entry.gap <= math.exp(-2 * k) * gap0 * REL_SLACK, k

        envelope = bound_smooth(cond, gap0, 4.0, trace.accepted)
        assert trace.final_gap <= envelope * REL_SLACK
    print(
        f"\nACCEPTANCE 1: PASS — e^-2k decrease at {cycles} restart points; "
        f"final gap {trace.final_gap:.2e} <= envelope {envelope:.2e} "
        f"({t.elapsed:.2f}s)"
    )


def test_criterion_2_bound_dominance_tau_positive():
    with Timer(10.0) as t:
        inst = make_norm_power(10, 4.0, 1.0, seed=2)
        cond = derive_conditioning(inst.regularity)
        assert cond.tau == 0.5
        gap0 = inst.gap0()
        schedule = optimal_schedule_smooth(cond, gap0, 4.0)

        finals = {}
        for budget in (100, 500, 2000):
            trace = restart_scheduled(
                inst.oracle, inst.x0, schedule, budget, 1.0, f_star=0.0
            )
            envelope = bound_smooth(cond, gap0, 4.0, trace.accepted)
            assert trace.final_gap <= envelope * REL_SLACK, budget
            finals[budget] = (trace.final_gap, envelope)

        _, plain = accelerated(inst.oracle, inst.x0, 1.0, 2000, f_star=0.0)
        restarted_gap = finals[2000][0]
        assert plain.final_gap >= 10 * restarted_gap

    separation = (
        f"plain AGM gap {plain.final_gap:.2e} >= 10x restarted {restarted_gap:.2e}"
    )
    if plain.final_gap == 0.0 and restarted_gap == 0.0:
        # the backtracking line search tracks the local curvature of the
        # radial quartic, so even the un-restarted method converges
        # linearly here and both gaps underflow to exact zero: the
        # inequality holds but shows no real separation on this instance
        separation += " (degenerate: both runs reached exact zero)"
    print(
        f"\nACCEPTANCE 2: PASS — envelopes hold at N=100/500/2000 "
        f"(final {finals[2000][0]:.2e} <= {finals[2000][1]:.2e}); {separation} "
        f"({t.elapsed:.2f}s)"
    )


def test_criterion_3_adaptive_grid():
    with Timer(60.0) as t:
        inst = make_norm_power(10, 4.0, 1.0, seed=2)
        cond = derive_conditioning(inst.regularity)
        gap0 = inst.gap0()
        N = 1000
        outcome = adaptive_grid(inst.oracle, inst.x0, N, 1.0, f_star=0.0)

        bound = bound_adaptive(cond, gap0, 4.0, N)
        best_gap = outcome.best_trace.final_gap
        assert best_gap <= bound * REL_SLACK

        i_max = math.floor(math.log2(N))
        j_max = math.ceil(math.log2(N))
        assert len(outcome.runs) == i_max * (j_max + 1)
        work_cap = i_max * (j_max + 1) * 2 * N
        assert outcome.total_inner_iterations <= work_cap
        for (i, j), run in outcome.runs.items():
            assert N <= run.accepted <= 2 * N, (i, j)
    print(
        f"\nACCEPTANCE 3: PASS — best scheme {outcome.best} gap {best_gap:.2e} "
        f"<= adaptive bound {bound:.2e}; work {outcome.total_inner_iterations} "
        f"<= {work_cap} ({t.elapsed:.2f}s)"
    )


def test_criterion_4_criterion_restart_dominance():
    with Timer(10.0) as t:
        reports = []
        for inst, budget in (
            (make_quadratic(50, 100.0, seed=0), 700),
            (make_norm_power(10, 4.0, 1.0, seed=2), 800),
        ):
            cond = derive_conditioning(inst.regularity)
            gap0 = inst.gap0()
            c = ufgm_constant(2.0)
            gamma = cond.q
            trace = criterion_restart(inst.oracle, inst.x0, 0.0, gamma, budget, 1.0)

            # cumulative iterations to reach each target never exceed the
            # scheduled counterpart's rounded totals
            k = 1
            targets_checked = 0
            while True:
                target = math.exp(-gamma * k) * gap0
                if target < trace.final_gap or k > 60:
                    break
                used = min(e.iteration for e in trace.entries if e.gap <= target)
                allowed = sum(
                    math.ceil(schedule_threshold(cond, gap0, c, gamma, i))
                    for i in range(1, k + 1)
                )
                assert used <= allowed, (inst.name, k, used, allowed)
                targets_checked += 1
                k += 1
            assert targets_checked >= 3, inst.name

            envelope = bound_holder(cond, gap0, c, trace.accepted)
            assert trace.final_gap <= envelope * REL_SLACK, inst.name
            reports.append(
                f"{inst.name}: {targets_checked} targets dominated, final "
                f"{trace.final_gap:.2e} <= {envelope:.2e}"
            )
    print(f"\nACCEPTANCE 4: PASS — {'; '.join(reports)} ({t.elapsed:.2f}s)")


def test_criterion_5_inner_solver_guarantees():
    with Timer(30.0) as t:
        rng = np.random.default_rng(5)
        worst_ratio = 0.0
        for trial in range(20):
            n = int(rng.integers(5, 41))
            kappa = float(10 ** rng.uniform(0, 3))
            inst = make_quadratic(n, kappa, seed=int(rng.integers(0, 10**6)))
            L = inst.regularity.L
            d0 = inst.x_star_distance(inst.x0)
            _, trace = accelerated(inst.oracle, inst.x0, 1.0, 80, f_star=0.0)
            for e in trace.entries:
                bound = bound_accelerated(L, d0, e.iteration)
                assert e.gap <= bound * REL_SLACK, (trial, e.iteration)
                worst_ratio = max(worst_ratio, e.gap / bound)

        inst = make_sharp_norm(1, seed=0)
        x0 = np.array([0.2])
        d0 = 0.2
        for eps in (1e-1, 1e-2, 1e-3):
            budget = min(3000, math.ceil(1.3 * 4 * d0**2 / eps**2) + 50)
            _, trace = universal_fast_gradient(
                inst.oracle, x0, eps, 1.0, budget, f_star=0.0
            )
            for e in trace.entries:
                bound = bound_universal(1.0, 1.0, d0, eps, e.iteration)
                assert e.f_value <= bound * REL_SLACK, (eps, e.iteration)
    print(
        f"\nACCEPTANCE 5: PASS — AGM bound holds pointwise on 20 quadratics "
        f"(worst ratio {worst_ratio:.3f}); universal bound holds pointwise at "
        f"eps=1e-1/1e-2/1e-3 ({t.elapsed:.2f}s)"
    )


def test_criterion_6_schedule_algebra():
    with Timer(5.0) as t:
        rng = np.random.default_rng(6)
        trials = 10**4

        # exact inversion of the schedule total
        for _ in range(trials):
            C = float(10 ** rng.uniform(-1, 3))
            alpha = 0.0 if rng.uniform() < 0.25 else float(rng.uniform(1e-6, 2.0))
            R = int(rng.integers(1, 51))
            N = schedule_total(C, alpha, R)
            back = restart_count(C, alpha, N)
            assert abs(back - R) <= 1e-12 * R

        # rounding degrades the envelope monotonically
        for _ in range(trials):
            gamma = float(rng.uniform(0.1, 4.0))
            C = float(rng.uniform(0.5, 60.0))
            alpha = 0.0 if rng.uniform() < 0.25 else float(rng.uniform(1e-6, 1.5))
            R = int(rng.integers(1, 30))
            N = float(sum(math.ceil(C * math.exp(alpha * k)) for k in range(1, R + 1)))
            rounded = bound_rounded(1.0, gamma, C, alpha, N)
            if alpha == 0.0:
                unrounded = math.exp(-gamma * N / C)
            else:
                unrounded = (alpha * math.exp(-alpha) / C * N + 1.0) ** (-gamma / alpha)
            assert rounded >= unrounded * (1 - 1e-12)

        # branch continuity as tau -> 0 (moderate exponents)
        from restartopt import DerivedConditioning

        for _ in range(trials):
            kappa = float(rng.uniform(1.0, 100.0))
            gap0 = float(rng.uniform(0.1, 10.0))
            rate = (4.0 * kappa) ** -0.5 / math.e
            N = float(rng.uniform(0.0, 5.0 / rate))
            lim = bound_smooth(DerivedConditioning(kappa, 1e-6, 2.0), gap0, 4.0, N)
            at0 = bound_smooth(DerivedConditioning(kappa, 0.0, 2.0), gap0, 4.0, N)
            assert abs(lim - at0) <= 1e-4 * at0
    print(
        f"\nACCEPTANCE 6: PASS — 3x{trials} property samples: inversion to "
        f"1e-12, rounded >= unrounded, tau->0 continuity to 1e-4 ({t.elapsed:.2f}s)"
    )


def test_criterion_7_figure1_qualitative(tmp_path):
    with Timer(60.0) as t:
        out = tmp_path / "cmp"
        code = cli_main([
            "compare",
            "--problem", "least-squares",
            "--rows", "208", "--cols", "60", "--cond", "10000.0", "--seed", "0",
            "--methods", "grad,acc,mono,grid",
            "--N", "3000",
            "--out", str(out),
        ])
        assert code == 0
        gaps = {}
        for line in (out / "summary.csv").read_text().strip().splitlines()[1:]:
            cells = line.split(",")
            gaps[cells[0]] = float(cells[2])
        assert gaps["grid"] <= gaps["mono"] <= gaps["acc"]

        for method in ("mono", "grid"):
            rows = (out / f"trace_{method}.csv").read_text().strip().splitlines()[1:]
            assert any(row.split(",")[3] == "1" for row in rows), method
    print(
        f"\nACCEPTANCE 7: PASS — final gaps grid {gaps['grid']:.2e} <= mono "
        f"{gaps['mono']:.2e} <= acc {gaps['acc']:.2e}; restart markers present "
        f"({t.elapsed:.2f}s)"
    )


def test_criterion_8_regularity_validation():
    with Timer(5.0) as t:
        A, b = synthetic_regression(208, 60, cond=100.0, seed=8)
        ls = make_least_squares(A, b)
        instances = [
            make_quadratic(50, 100.0, seed=0),
            make_norm_power(10, 4.0, 1.0, seed=2),
            make_norm_power(6, 2.0, 1.0, seed=3),
            make_sharp_norm(8, seed=4),
            ls,
        ]
        for inst in instances:
            points = sample_validation_points(inst, 100, seed=42)
            assert check_sharpness_bound(
                inst.oracle, inst.regularity, points, inst.x_star_distance
            ), inst.name
            assert check_suboptimality_upper_bound(
                inst.oracle, inst.regularity, points, inst.x_star_distance
            ), inst.name
            fd_points = points[:10]
            if inst.regularity.s == 1.0:
                fd_points = [p for p in points if np.linalg.norm(p) > 0.05][:10]
            err = gradient_finite_difference_error(inst.oracle, fd_points)
            assert err <= 1e-5, inst.name
    print(
        f"\nACCEPTANCE 8: PASS — sharpness, suboptimality upper bound, and "
        f"finite-difference checks hold on all {len(instances)} synthetic "
        f"instances ({t.elapsed:.2f}s)"
    )
