"""Benchmark command line: run, compare, and grid-search restart schemes.

Subcommands::

    restartopt run      one method on one problem, emitting a trace file
    restartopt compare  several methods at equal budget, with a summary table
    restartopt grid     the full schedule grid search, one trace per scheme

Configuration comes from flags or a plain ``key=value`` file given with
``--config``; flags override file values. Traces are written atomically
as CSV (header ``iter,f,gap,restart,eps_target``, floats with 17
significant digits) or JSON (same fields per entry plus a metadata
block). Identical configs and seeds produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

import numpy as np

from . import bounds
from .core import DivergenceError, derive_conditioning
from .problems import (
    DatasetFormatError,
    ProblemInstance,
    load_dataset,
    make_dual_svm,
    make_lasso,
    make_least_squares,
    make_logistic,
    make_norm_power,
    make_quadratic,
    make_sharp_norm,
    synthetic_classification,
    synthetic_regression,
)
from .restarts import (
    GridOutcome,
    Schedule,
    adaptive_grid,
    criterion_restart,
    h_restart,
    monotone_restart,
    optimal_schedule_holder,
    optimal_schedule_smooth,
    restart_scheduled,
)
from .solvers import Trace, accelerated, gradient_descent

METHODS = ("grad", "acc", "mono", "restart", "h-restart", "criterion", "grid")
PROBLEMS = (
    "quadratic",
    "norm-power",
    "sharp-norm",
    "least-squares",
    "logistic",
    "lasso",
    "dual-svm",
)


class ConfigError(ValueError):
    """Invalid or incomplete experiment configuration."""


def _fmt(x: Optional[float]) -> str:
    return "" if x is None else format(float(x), ".17g")


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_trace_csv(trace: Trace, path: str) -> None:
    lines = ["iter,f,gap,restart,eps_target"]
    for e in trace.entries:
        lines.append(
            f"{e.iteration},{_fmt(e.f_value)},{_fmt(e.gap)},"
            f"{int(e.restart)},{_fmt(e.eps_target)}"
        )
    _atomic_write(path, "\n".join(lines) + "\n")


def write_trace_json(trace: Trace, path: str, config: dict) -> None:
    doc = {
        "metadata": {
            "config": config,
            "accepted": trace.accepted,
            "final_f": trace.final_f,
            "final_gap": trace.final_gap,
            "final_L_hat": trace.final_L_hat,
            "oracle_calls": {
                "value": trace.n_value,
                "grad": trace.n_grad,
                "prox": trace.n_prox,
            },
            "backtracks": trace.backtracks,
            "restarts": trace.restart_count,
            "notes": list(trace.notes),
        },
        "entries": [
            {
                "iter": e.iteration,
                "f": e.f_value,
                "gap": e.gap,
                "restart": bool(e.restart),
                "eps_target": e.eps_target,
            }
            for e in trace.entries
        ],
    }
    _atomic_write(path, json.dumps(doc, indent=1) + "\n")


def write_trace(trace: Trace, path: str, fmt: str, config: dict) -> None:
    if fmt == "csv":
        write_trace_csv(trace, path)
    elif fmt == "json":
        write_trace_json(trace, path, config)
    else:
        raise ConfigError(f"unknown output format {fmt!r}")


def build_instance(cfg: dict) -> ProblemInstance:
    """Construct the problem named by the config (dataset- or generator-backed)."""
    dataset = cfg.get("dataset")
    if dataset is not None:
        loss = cfg.get("loss") or "least-squares"
        if not os.path.exists(dataset):
            raise ConfigError(f"dataset file not found: {dataset}")
        try:
            X, y = load_dataset(dataset, fmt=cfg.get("dataset_format", "csv"))
        except DatasetFormatError as exc:
            raise ConfigError(str(exc)) from None
        return _apply_loss(loss, X, y, cfg)

    name = cfg.get("problem")
    if name is None:
        raise ConfigError("either --problem or --dataset is required")
    seed = int(cfg.get("seed", 0))
    dim = int(cfg.get("dim", 10))
    if name == "quadratic":
        return make_quadratic(dim, float(cfg.get("kappa", 100.0)), seed=seed)
    if name == "norm-power":
        return make_norm_power(
            dim, float(cfg.get("power", 4.0)), float(cfg.get("radius", 1.0)), seed=seed
        )
    if name == "sharp-norm":
        return make_sharp_norm(dim, seed=seed)
    if name in ("least-squares", "lasso"):
        A, b = synthetic_regression(
            int(cfg.get("rows", 208)),
            int(cfg.get("cols", 60)),
            cond=float(cfg.get("cond", 100.0)),
            seed=seed,
            noise=float(cfg.get("noise", 0.1)),
        )
        return _apply_loss(name, A, b, cfg)
    if name in ("logistic", "dual-svm"):
        A, y = synthetic_classification(
            int(cfg.get("rows", 208)),
            int(cfg.get("cols", 60)),
            cond=float(cfg.get("cond", 100.0)),
            seed=seed,
            flip=float(cfg.get("flip", 0.1)),
        )
        return _apply_loss(name, A, y, cfg)
    raise ConfigError(f"unknown problem {name!r} (choose from {', '.join(PROBLEMS)})")


def _apply_loss(loss: str, X: np.ndarray, y: np.ndarray, cfg: dict) -> ProblemInstance:
    if loss == "least-squares":
        return make_least_squares(X, y)
    if loss == "logistic":
        return make_logistic(X, y)
    if loss == "lasso":
        return make_lasso(X, y, lam=float(cfg.get("lam", 1.0)))
    if loss == "dual-svm":
        return make_dual_svm(X, y, regularization=float(cfg.get("reg", 1.0)))
    raise ConfigError(f"unknown loss {loss!r}")


def _gap0(instance: ProblemInstance, cfg: dict) -> float:
    f_star = cfg.get("f_star")
    if f_star is None:
        f_star = instance.f_star
    if f_star is not None:
        return float(instance.oracle.value(instance.x0)) - float(f_star)
    eps0 = cfg.get("eps0")
    if eps0 is not None:
        return float(eps0)
    raise ConfigError(
        "this method needs an initial gap estimate: supply --f-star or --eps0"
    )


def _explicit_schedule(cfg: dict) -> Optional[Schedule]:
    if cfg.get("C") is None:
        return None
    alpha = float(cfg.get("alpha", 0.0))
    kind = "constant" if alpha == 0.0 else "geometric"
    return Schedule(kind=kind, C=float(cfg["C"]), alpha=alpha)


def run_method(method: str, instance: ProblemInstance, cfg: dict) -> Trace:
    """Dispatch one method on one problem instance per the config."""
    N = int(cfg["N"])
    L0 = float(cfg.get("L0", 1.0))
    f_star = cfg.get("f_star")
    f_star = float(f_star) if f_star is not None else instance.f_star
    oracle = instance.oracle
    x0 = instance.x0

    if method == "grad":
        return gradient_descent(oracle, x0, L0, N, f_star=f_star)
    if method == "acc":
        _, trace = accelerated(oracle, x0, L0, N, f_star=f_star)
        return trace
    if method == "mono":
        return monotone_restart(oracle, x0, N, L0, f_star=f_star)
    if method == "grid":
        outcome = adaptive_grid(oracle, x0, N, L0, f_star=f_star)
        return outcome.best_trace

    if method == "restart":
        schedule = _explicit_schedule(cfg)
        if schedule is None:
            if instance.regularity is None or instance.regularity.s != 2.0:
                raise ConfigError(
                    "restart needs --C/--alpha, or an instance with declared "
                    "smooth (s = 2) regularity to derive the optimal schedule"
                )
            cond = derive_conditioning(instance.regularity)
            schedule = optimal_schedule_smooth(cond, _gap0(instance, cfg), 4.0)
        return restart_scheduled(oracle, x0, schedule, N, L0, f_star=f_star)

    if method == "h-restart":
        eps0 = cfg.get("eps0")
        eps0 = float(eps0) if eps0 is not None else _gap0(instance, cfg)
        schedule = _explicit_schedule(cfg)
        gamma = cfg.get("gamma")
        if schedule is None or gamma is None:
            if instance.regularity is None:
                raise ConfigError(
                    "h-restart needs --C/--alpha/--gamma, or an instance with "
                    "declared regularity to derive the optimal schedule"
                )
            cond = derive_conditioning(instance.regularity)
            opt_sched, opt_gamma = optimal_schedule_holder(
                cond, eps0, bounds.ufgm_constant(instance.regularity.s)
            )
            schedule = schedule or opt_sched
            gamma = float(gamma) if gamma is not None else opt_gamma
        return h_restart(oracle, x0, eps0, float(gamma), schedule, N, L0, f_star=f_star)

    if method == "criterion":
        if f_star is None:
            raise ConfigError("criterion restart needs --f-star (or a known optimum)")
        gamma = cfg.get("gamma")
        if gamma is None:
            if instance.regularity is not None:
                gamma = derive_conditioning(instance.regularity).q
            else:
                gamma = 1.0  # parameter-free default
        return criterion_restart(oracle, x0, float(f_star), float(gamma), N, L0)

    raise ConfigError(f"unknown method {method!r} (choose from {', '.join(METHODS)})")


def applicable_envelope(
    method: str, instance: ProblemInstance, cfg: dict
) -> Optional[tuple[str, float]]:
    """Theoretical guarantee at budget N for side-by-side reporting, if any."""
    if instance.regularity is None:
        return None
    N = float(cfg["N"])
    reg = instance.regularity
    cond = derive_conditioning(reg)
    try:
        if method == "acc" and instance.x_star_distance is not None:
            d0 = instance.x_star_distance(instance.x0)
            return "accelerated c L d^2 / N^2", bounds.bound_accelerated(reg.L, d0, N)
        if method == "grad":
            return "gradient-descent envelope", bounds.bound_gradient_descent(
                cond, _gap0(instance, cfg), N
            )
        if method == "restart":
            return "scheduled-restart envelope", bounds.bound_smooth(
                cond, _gap0(instance, cfg), 4.0, N
            )
        if method in ("h-restart", "criterion"):
            c = bounds.ufgm_constant(reg.s)
            return "accuracy-scheduled envelope", bounds.bound_holder(
                cond, _gap0(instance, cfg), c, N
            )
        if method == "grid":
            return "grid-search envelope", bounds.bound_adaptive(
                cond, _gap0(instance, cfg), 4.0, N
            )
    except (ConfigError, ValueError):
        return None
    return None


# ---------------------------------------------------------------------------
# argument handling


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value file; flags override its values")
    p.add_argument("--problem", choices=PROBLEMS)
    p.add_argument("--dataset", help="path to a CSV or LibSVM file")
    p.add_argument("--dataset-format", choices=("csv", "libsvm"), dest="dataset_format")
    p.add_argument("--loss", choices=("least-squares", "logistic", "lasso", "dual-svm"))
    p.add_argument("--N", type=int, help="budget of accepted inner iterations")
    p.add_argument("--L0", type=float, help="initial Lipschitz estimate (default 1)")
    p.add_argument("--seed", type=int, help="generator seed (default 0)")
    p.add_argument("--gamma", type=float, help="accuracy decay rate per cycle")
    p.add_argument("--C", type=float, help="explicit schedule constant")
    p.add_argument("--alpha", type=float, help="explicit schedule growth rate")
    p.add_argument("--eps0", type=float, help="initial gap (upper) estimate")
    p.add_argument("--f-star", type=float, dest="f_star", help="known optimal value")
    p.add_argument("--out", help="output file (run) or directory (compare/grid)")
    p.add_argument("--format", choices=("csv", "json"), help="trace format (default csv)")
    p.add_argument("--dim", type=int, help="dimension of synthetic problems")
    p.add_argument("--kappa", type=float, help="quadratic: spectral condition number")
    p.add_argument("--power", type=float, help="norm-power: exponent r >= 2")
    p.add_argument("--radius", type=float, help="norm-power: validated ball radius")
    p.add_argument("--lam", type=float, help="lasso: l1 weight (default 1)")
    p.add_argument("--reg", type=float, help="dual-svm: regularization (default 1)")
    p.add_argument("--rows", type=int, help="synthetic dataset: sample count")
    p.add_argument("--cols", type=int, help="synthetic dataset: feature count")
    p.add_argument("--cond", type=float, help="synthetic dataset: conditioning")
    p.add_argument("--noise", type=float, help="synthetic regression: target noise")
    p.add_argument("--flip", type=float, help="synthetic classification: label flips")


def _read_config_file(path: str) -> dict:
    values: dict = {}
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value")
                key, val = (part.strip() for part in line.split("=", 1))
                values[key.replace("-", "_")] = val
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    return values


_INT_KEYS = {"N", "seed", "dim", "rows", "cols"}
_FLOAT_KEYS = {
    "L0", "gamma", "C", "alpha", "eps0", "f_star", "kappa", "power",
    "radius", "lam", "reg", "cond", "noise", "flip",
}


def effective_config(args: argparse.Namespace) -> dict:
    """Merge config-file values under explicit flags and coerce types."""
    cfg: dict = {}
    if getattr(args, "config", None):
        for key, raw in _read_config_file(args.config).items():
            if key in _INT_KEYS:
                cfg[key] = int(raw)
            elif key in _FLOAT_KEYS:
                cfg[key] = float(raw)
            else:
                cfg[key] = raw
    for key, val in vars(args).items():
        if key in ("config", "command", "methods", "handler") or val is None:
            continue
        cfg[key] = val
    if getattr(args, "methods", None) is not None:
        cfg["methods"] = args.methods
    if cfg.get("N") is None:
        raise ConfigError("--N is required")
    if int(cfg["N"]) < 1:
        raise ConfigError(f"--N must be >= 1, got {cfg['N']}")
    cfg.setdefault("L0", 1.0)
    cfg.setdefault("seed", 0)
    cfg.setdefault("format", "csv")
    return cfg


def _config_echo(cfg: dict, method: str) -> dict:
    echo = {
        k: v
        for k, v in sorted(cfg.items())
        if v is not None and isinstance(v, (str, int, float, bool))
    }
    echo["method"] = method
    return echo


def cmd_run(args: argparse.Namespace) -> int:
    cfg = effective_config(args)
    method = cfg.get("method")
    if method is None:
        raise ConfigError("--method is required")
    instance = build_instance(cfg)
    trace = run_method(method, instance, cfg)
    fmt = cfg["format"]
    out = cfg.get("out") or f"trace.{fmt}"
    write_trace(trace, out, fmt, _config_echo(cfg, method))
    print(f"problem: {instance.name}")
    print(f"method: {method}  accepted: {trace.accepted}  restarts: {trace.restart_count}")
    print(f"final f: {_fmt(trace.final_f)}")
    if trace.final_gap is not None:
        print(f"final gap: {_fmt(trace.final_gap)}")
    env = applicable_envelope(method, instance, cfg)
    if env is not None:
        print(f"envelope [{env[0]}] at N={cfg['N']}: {_fmt(env[1])}")
    print(f"trace written to {out}")
    for note in trace.notes:
        print(f"note: {note}")
    return 0


def _summary_row(method: str, trace: Trace) -> dict:
    return {
        "method": method,
        "final_f": trace.final_f,
        "final_gap": trace.final_gap,
        "restarts": trace.restart_count,
        "oracle_calls": trace.oracle_calls(),
        "accepted": trace.accepted,
        "backtracks": trace.backtracks,
    }


def cmd_compare(args: argparse.Namespace) -> int:
    cfg = effective_config(args)
    methods = cfg.get("methods")
    if not methods:
        raise ConfigError("--methods is required (comma-separated list)")
    if isinstance(methods, str):
        methods = [m.strip() for m in methods.split(",") if m.strip()]
    for m in methods:
        if m not in METHODS:
            raise ConfigError(f"unknown method {m!r} (choose from {', '.join(METHODS)})")
    instance = build_instance(cfg)
    out_dir = cfg.get("out") or "compare_out"
    os.makedirs(out_dir, exist_ok=True)
    fmt = cfg["format"]

    rows = []
    failures = []
    for method in methods:
        try:
            trace = run_method(method, instance, cfg)
        except (ConfigError, DivergenceError) as exc:
            failures.append((method, str(exc)))
            rows.append({"method": method, "error": str(exc)})
            continue
        rows.append(_summary_row(method, trace))
        write_trace(
            trace, os.path.join(out_dir, f"trace_{method}.{fmt}"), fmt,
            _config_echo(cfg, method),
        )

    header = ["method", "final_f", "final_gap", "restarts", "oracle_calls", "accepted"]
    print(f"problem: {instance.name}  N={cfg['N']}")
    print("  ".join(f"{h:>12}" for h in header))
    for row in rows:
        if "error" in row:
            print(f"{row['method']:>12}  FAILED: {row['error']}")
            continue
        cells = [
            f"{row['method']:>12}",
            f"{row['final_f']:>12.5e}",
            f"{row['final_gap']:>12.5e}" if row["final_gap"] is not None else f"{'':>12}",
            f"{row['restarts']:>12}",
            f"{row['oracle_calls']:>12}",
            f"{row['accepted']:>12}",
        ]
        print("  ".join(cells))

    summary_path = os.path.join(out_dir, f"summary.{fmt}")
    if fmt == "json":
        _atomic_write(summary_path, json.dumps({"problem": instance.name, "rows": rows}, indent=1) + "\n")
    else:
        lines = ["method,final_f,final_gap,restarts,oracle_calls,accepted,error"]
        for row in rows:
            if "error" in row:
                lines.append(f"{row['method']},,,,,,\"{row['error']}\"")
            else:
                lines.append(
                    f"{row['method']},{_fmt(row['final_f'])},{_fmt(row['final_gap'])},"
                    f"{row['restarts']},{row['oracle_calls']},{row['accepted']},"
                )
        _atomic_write(summary_path, "\n".join(lines) + "\n")
    print(f"summary written to {summary_path}")
    return 1 if failures else 0


def cmd_grid(args: argparse.Namespace) -> int:
    cfg = effective_config(args)
    instance = build_instance(cfg)
    f_star = cfg.get("f_star")
    f_star = float(f_star) if f_star is not None else instance.f_star
    outcome: GridOutcome = adaptive_grid(
        instance.oracle, instance.x0, int(cfg["N"]), float(cfg["L0"]), f_star=f_star
    )
    out_dir = cfg.get("out") or "grid_out"
    os.makedirs(out_dir, exist_ok=True)
    fmt = cfg["format"]
    rows = []
    for (i, j), trace in sorted(outcome.runs.items()):
        name = f"trace_i{i}_j{j}.{fmt}"
        write_trace(
            trace, os.path.join(out_dir, name), fmt,
            _config_echo(cfg, f"grid[{i},{j}]"),
        )
        rows.append(
            {
                "i": i,
                "j": j,
                "C": float(2**i),
                "alpha": 0.0 if j == 0 else 2.0**-j,
                "accepted": trace.accepted,
                "final_f": trace.final_f,
                "final_gap": trace.final_gap,
                "restarts": trace.restart_count,
                "best": (i, j) == outcome.best,
            }
        )
    summary_path = os.path.join(out_dir, f"summary.{fmt}")
    if fmt == "json":
        doc = {
            "problem": instance.name,
            "best": list(outcome.best),
            "total_inner_iterations": outcome.total_inner_iterations,
            "skipped": [list(ij) for ij in outcome.skipped],
            "rows": rows,
        }
        _atomic_write(summary_path, json.dumps(doc, indent=1) + "\n")
    else:
        lines = ["i,j,C,alpha,accepted,final_f,final_gap,restarts,best"]
        for row in rows:
            lines.append(
                f"{row['i']},{row['j']},{_fmt(row['C'])},{_fmt(row['alpha'])},"
                f"{row['accepted']},{_fmt(row['final_f'])},{_fmt(row['final_gap'])},"
                f"{row['restarts']},{int(row['best'])}"
            )
        _atomic_write(summary_path, "\n".join(lines) + "\n")
    bi, bj = outcome.best
    best = outcome.best_trace
    print(f"problem: {instance.name}  N={cfg['N']}")
    print(f"schemes run: {len(outcome.runs)}  skipped: {len(outcome.skipped)}")
    print(f"total inner iterations: {outcome.total_inner_iterations}")
    gap_text = _fmt(best.final_gap) if best.final_gap is not None else "n/a"
    print(f"best scheme: (i={bi}, j={bj})  final f: {_fmt(best.final_f)}  gap: {gap_text}")
    print(f"summary written to {summary_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="restartopt",
        description="Benchmark restart schemes for first-order convex optimization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one method and write its trace")
    _add_common(p_run)
    p_run.add_argument("--method", choices=METHODS)
    p_run.set_defaults(handler=cmd_run)

    p_cmp = sub.add_parser("compare", help="run several methods at equal budget")
    _add_common(p_cmp)
    p_cmp.add_argument("--methods", help="comma-separated subset of: " + ",".join(METHODS))
    p_cmp.set_defaults(handler=cmd_compare)

    p_grid = sub.add_parser("grid", help="run the schedule grid search")
    _add_common(p_grid)
    p_grid.set_defaults(handler=cmd_grid)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DatasetFormatError, DivergenceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
