"""Inner first-order methods emitting per-iteration traces.

Three solvers: backtracking gradient descent, Nesterov's accelerated
gradient method, and the universal fast gradient method (UFGM). The
accelerated method is the UFGM run with target accuracy 0. All three
double their Lipschitz estimate until the (possibly epsilon-relaxed)
descent condition holds, halve it after every accepted step, and report
the final estimate so restart schemes can warm-start the next cycle.

Iteration accounting: one inner iteration = one accepted step. Line
search backtracks are tallied separately (``Trace.backtracks``), as are
objective/gradient/prox evaluations, so both accountings are reportable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import DivergenceError, ProximalOracle, Vector

# Doubling the estimate this many times within a single step means the
# descent test is chasing rounding noise; we accept and record a note.
_MAX_DOUBLINGS_PER_STEP = 120

# Halving after every accepted step must not drive the estimate into
# subnormals (or exactly 0 once iterates sit at the optimum).
_L_HAT_MIN = 1e-280

_GAP_FLOOR = -1e-12


@dataclass
class TraceEntry:
    """One accepted inner iterate."""

    iteration: int
    f_value: float
    gap: Optional[float]
    restart: bool = False
    eps_target: Optional[float] = None


@dataclass
class Trace:
    """Per-iteration record of a solver or restart-scheme run.

    ``entries`` holds one row per accepted inner iteration with strictly
    increasing cumulative counts; ``gap`` entries are present iff
    ``f_star`` is known. Restart markers sit on the last iterate of each
    cycle that was followed by another cycle.
    """

    entries: list[TraceEntry] = field(default_factory=list)
    final_point: Optional[Vector] = None
    final_L_hat: float = 0.0
    f_star: Optional[float] = None
    f_initial: Optional[float] = None
    n_value: int = 0
    n_grad: int = 0
    n_prox: int = 0
    backtracks: int = 0
    max_L_hat: float = 0.0
    notes: list[str] = field(default_factory=list)

    @property
    def accepted(self) -> int:
        return len(self.entries)

    @property
    def final_f(self) -> float:
        if self.entries:
            return self.entries[-1].f_value
        if self.f_initial is None:
            raise ValueError("empty trace with no recorded initial value")
        return self.f_initial

    @property
    def final_gap(self) -> Optional[float]:
        if self.f_star is None:
            return None
        return self.final_f - self.f_star

    @property
    def restart_count(self) -> int:
        return sum(1 for e in self.entries if e.restart)

    def restart_entries(self) -> list[TraceEntry]:
        return [e for e in self.entries if e.restart]

    def oracle_calls(self) -> int:
        return self.n_value + self.n_grad + self.n_prox

    def validate(self) -> None:
        """Check structural invariants; raises AssertionError on violation."""
        last = 0
        for e in self.entries:
            assert e.iteration > last, "iteration counts must strictly increase"
            last = e.iteration
            if self.f_star is None:
                assert e.gap is None
            else:
                assert e.gap is not None
                assert e.gap >= _GAP_FLOOR * max(1.0, abs(self.f_star))


def _gap(f: float, f_star: Optional[float]) -> Optional[float]:
    return None if f_star is None else f - f_star


def _check_finite(*values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise DivergenceError("non-finite objective or gradient encountered")


def _grad_norm_sq(v: Vector) -> float:
    return float(np.dot(v, v))


def gradient_descent(
    oracle: ProximalOracle,
    x0: Vector,
    L0: float,
    budget: int,
    *,
    f_star: Optional[float] = None,
) -> Trace:
    """Gradient descent with a doubling/halving line search on the step.

    Each step backtracks (doubling the Lipschitz estimate) until the
    candidate satisfies the quadratic descent condition, accepts it, then
    halves the estimate. Composite oracles take proximal-gradient steps,
    with the descent condition tested on the smooth part only.
    """
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    if L0 <= 0:
        raise ValueError(f"L0 must be positive, got {L0}")
    x = np.array(x0, dtype=float)
    L_hat = float(L0)
    trace = Trace(f_star=f_star, max_L_hat=L_hat)
    f0_x = oracle.smooth_value(x)
    trace.n_value += 1
    trace.f_initial = f0_x + oracle.psi(x)
    _check_finite(trace.f_initial)

    for t in range(1, budget + 1):
        g = np.asarray(oracle.smooth_gradient(x), dtype=float)
        trace.n_grad += 1
        _check_finite(_grad_norm_sq(g))
        doublings = 0
        while True:
            if oracle.prox is not None:
                cand = np.asarray(oracle.prox(x - g / L_hat, 1.0 / L_hat), dtype=float)
                trace.n_prox += 1
            else:
                cand = x - g / L_hat
            f0_cand = oracle.smooth_value(cand)
            trace.n_value += 1
            finite = math.isfinite(f0_cand)
            if finite:
                d = cand - x
                model = f0_x + float(np.dot(g, d)) + 0.5 * L_hat * _grad_norm_sq(d)
                if f0_cand <= model:
                    break
            L_hat *= 2.0
            trace.backtracks += 1
            doublings += 1
            trace.max_L_hat = max(trace.max_L_hat, L_hat)
            if doublings >= _MAX_DOUBLINGS_PER_STEP:
                if not finite:
                    raise DivergenceError(
                        f"objective stayed non-finite through the line search (step {t})"
                    )
                trace.notes.append(
                    f"line search stalled at numerical precision (step {t}); accepted"
                )
                break
        x = cand
        f0_x = f0_cand
        f_full = f0_cand + oracle.psi(x)
        L_hat = max(L_hat / 2.0, _L_HAT_MIN)
        trace.entries.append(TraceEntry(t, f_full, _gap(f_full, f_star)))

    trace.final_point = x
    trace.final_L_hat = L_hat
    return trace


@dataclass
class SolverState:
    """Internal state of the universal fast gradient method.

    The estimate function phi_t(u) = ||u - anchor||^2 / 2 +
    sum_i a_i [f0(x_i) + <grad f0(x_i), u - x_i>] (+ A_t psi(u) for
    composite problems) stays a unit-curvature quadratic, so its argmin
    is anchor - grad_sum, passed through the prox with step A_t when a
    nonsmooth part is present.
    """

    anchor: Vector
    y: Vector
    L_hat: float
    A: float = 0.0
    grad_sum: Vector = None  # type: ignore[assignment]
    inner_count: int = 0

    def __post_init__(self) -> None:
        if self.grad_sum is None:
            self.grad_sum = np.zeros_like(self.anchor)

    def estimate_argmin(self, oracle: ProximalOracle, trace: Trace) -> Vector:
        z = self.anchor - self.grad_sum
        if oracle.prox is not None and self.A > 0.0:
            z = np.asarray(oracle.prox(z, self.A), dtype=float)
            trace.n_prox += 1
        return z


def universal_fast_gradient(
    oracle: ProximalOracle,
    x0: Vector,
    epsilon: float,
    L0: float,
    budget: int,
    stop: Optional[Callable[[Vector, float], bool]] = None,
    *,
    f_star: Optional[float] = None,
) -> tuple[Vector, Trace]:
    """Universal fast gradient method with target accuracy ``epsilon``.

    Implements the estimate-sequence method: z_t minimizes the accumulated
    lower model, the coupling weight solves a^2 = (A_t + a) / L_hat, the
    candidate is a (proximal) gradient step from x = tau z_t + (1-tau) y_t,
    and the line search doubles L_hat until the epsilon-relaxed descent
    condition

        f0(y) <= f0(x) + <grad f0(x), y - x> + L_hat/2 ||y - x||^2
                 + tau * epsilon / 2

    holds, halving once after each accepted step. With epsilon = 0 the
    slack vanishes and the method is the plain backtracking accelerated
    gradient. If ``stop`` is given, the run terminates at the first
    accepted iterate y with stop(y, f(y)) true.

    Note: with epsilon = 0 on non-smooth problems (s < 2) there is no
    termination guarantee; the method simply runs out its budget.

    Returns the final point and its trace.
    """
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    if L0 <= 0:
        raise ValueError(f"L0 must be positive, got {L0}")
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")

    x_start = np.array(x0, dtype=float)
    state = SolverState(anchor=x_start, y=x_start.copy(), L_hat=float(L0))
    trace = Trace(f_star=f_star, max_L_hat=state.L_hat)
    f0_start = oracle.smooth_value(x_start)
    trace.n_value += 1
    trace.f_initial = f0_start + oracle.psi(x_start)
    _check_finite(trace.f_initial)
    eps_mark = epsilon if epsilon > 0 else None

    for t in range(1, budget + 1):
        z = state.estimate_argmin(oracle, trace)
        doublings = 0
        while True:
            a = (1.0 + math.sqrt(1.0 + 4.0 * state.A * state.L_hat)) / (2.0 * state.L_hat)
            tau = a / (state.A + a)
            x = tau * z + (1.0 - tau) * state.y
            g = np.asarray(oracle.smooth_gradient(x), dtype=float)
            trace.n_grad += 1
            f0_x = oracle.smooth_value(x)
            trace.n_value += 1
            finite = math.isfinite(f0_x) and math.isfinite(_grad_norm_sq(g))
            if finite:
                if oracle.prox is not None:
                    y_cand = np.asarray(
                        oracle.prox(x - g / state.L_hat, 1.0 / state.L_hat), dtype=float
                    )
                    trace.n_prox += 1
                else:
                    y_cand = x - g / state.L_hat
                f0_y = oracle.smooth_value(y_cand)
                trace.n_value += 1
                finite = math.isfinite(f0_y)
            if finite:
                d = y_cand - x
                model = (
                    f0_x
                    + float(np.dot(g, d))
                    + 0.5 * state.L_hat * _grad_norm_sq(d)
                    + tau * epsilon / 2.0
                )
                if f0_y <= model:
                    break
            state.L_hat *= 2.0
            trace.backtracks += 1
            doublings += 1
            trace.max_L_hat = max(trace.max_L_hat, state.L_hat)
            if doublings >= _MAX_DOUBLINGS_PER_STEP:
                if not finite:
                    raise DivergenceError(
                        f"objective stayed non-finite through the line search (step {t})"
                    )
                trace.notes.append(
                    f"line search stalled at numerical precision (step {t}); accepted"
                )
                break
        state.A += a
        state.grad_sum = state.grad_sum + a * g
        state.y = y_cand
        state.L_hat = max(state.L_hat / 2.0, _L_HAT_MIN)
        state.inner_count = t
        f_full = f0_y + oracle.psi(y_cand)
        trace.entries.append(
            TraceEntry(t, f_full, _gap(f_full, f_star), eps_target=eps_mark)
        )
        if stop is not None and stop(y_cand, f_full):
            break

    trace.final_point = state.y
    trace.final_L_hat = state.L_hat
    return state.y, trace


def accelerated(
    oracle: ProximalOracle,
    x0: Vector,
    L0: float,
    t: int,
    *,
    f_star: Optional[float] = None,
    stop: Optional[Callable[[Vector, float], bool]] = None,
) -> tuple[Vector, Trace]:
    """Nesterov's accelerated gradient method: the universal method at accuracy 0."""
    return universal_fast_gradient(oracle, x0, 0.0, L0, t, stop=stop, f_star=f_star)
