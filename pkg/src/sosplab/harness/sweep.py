"""Single solver runs and epsilon sweeps.

A sweep runs each algorithm over a strictly decreasing epsilon grid and
fits a log-log line through per-epsilon medians of queries to success.
A replication succeeds when its trajectory reaches an exact gradient
norm at most epsilon within the fixed horizon; its cost is the full
fixed-horizon query total (the budget the step-size schedule commits to
up front), which is what the complexity exponents describe.  First
passage along the trajectory is recorded too and can be selected as the
fitted metric instead (``fit_metric: "first_passage"``); it is the
earlier, drain-dominated crossing and generally shows a shallower slope.
Medians, not means: query counts are heavy-tailed and a single unlucky
replication should not move the fitted exponent.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..core.oracle import NoiseParams, QueryLedger
from ..core.problems import ProblemInstance
from .. import solvers
from .._rng import derive_seed
from ..errors import BudgetExceeded, ConfigError
from .config import ExperimentConfig, build_noise, build_problem
from .reports import first_passage_row, result_row

ENV_WORKERS = "SOSPLAB_WORKERS"

_SOLVER_FUNCS = {
    "sgd_hvp_rvr": solvers.sgd_hvp_rvr,
    "cubic_rvr": solvers.cubic_rvr,
    "sosp_hvp": solvers.sosp_hvp,
    "sosp_cubic": solvers.sosp_cubic,
}


def worker_count() -> int:
    raw = os.environ.get(ENV_WORKERS, "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{ENV_WORKERS} must be an integer, got {raw!r}") from exc
    return max(1, n)


def sgd_schedule(problem: ProblemInstance, noise: NoiseParams, epsilon: float,
                 cfg: ExperimentConfig) -> tuple[float, int]:
    """Step size and horizon for the plain-SGD baseline at one epsilon.

    Unless overridden, the step is small enough that the noise floor sits
    at eps^2/2 and the horizon long enough to drain the initial gap, which
    yields the classical eps^-4 query scaling.
    """
    reg = problem.regularity
    step = cfg.get("step_size")
    if step is None:
        step = 1.0 / (2.0 * reg.l1)
        if noise.sigma1 > 0.0:
            step = min(step, epsilon**2 / (2.0 * reg.l1 * noise.sigma1**2))
    step = float(step)
    horizon = cfg.get("horizon")
    if horizon is None:
        horizon = math.ceil(4.0 * reg.delta / (step * epsilon**2))
    return step, int(horizon)


def _run_single(cfg: ExperimentConfig, epsilon: float, seed: int
                ) -> solvers.RunResult:
    problem = build_problem(cfg)
    noise = build_noise(cfg)
    algorithm = cfg.require("algorithm")
    budget_cap = int(cfg.get("budget_cap", solvers.DEFAULT_BUDGET_CAP))
    overrides = cfg.get("overrides")
    if algorithm == "sgd":
        step, horizon = sgd_schedule(problem, noise, epsilon, cfg)
        if horizon > budget_cap:
            raise BudgetExceeded(
                f"sgd needs {horizon} queries > cap {budget_cap}",
                required=horizon)
        return solvers.sgd_baseline(problem, noise, epsilon, step_size=step,
                                    horizon=horizon, seed=seed,
                                    budget_cap=budget_cap,
                                    track_first_passage=True)
    func = _SOLVER_FUNCS[algorithm]
    kwargs = dict(seed=seed, overrides=overrides, budget_cap=budget_cap,
                  track_first_passage=True)
    if algorithm in ("sosp_hvp", "sosp_cubic"):
        kwargs["gamma"] = float(cfg.require("gamma"))
    return func(problem, noise, epsilon, **kwargs)


def run_solve(cfg: ExperimentConfig) -> tuple[solvers.RunResult, dict]:
    """One run of the configured algorithm; returns (result, result row).

    The row's success flag means the exact output diagnostics meet the
    target: gradient norm at most epsilon and, when gamma is configured,
    smallest Hessian eigenvalue at least -gamma.
    """
    epsilon = float(cfg.require("epsilon"))
    gamma = cfg.get("gamma")
    t0 = time.perf_counter()
    result = _run_single(cfg, epsilon, cfg.seed)
    wall_ms = (time.perf_counter() - t0) * 1e3
    success = result.grad_norm_exact <= epsilon
    if gamma is not None:
        success = success and result.lambda_min_exact >= -float(gamma)
    row = result_row(command="solve", algorithm=result.algorithm, eps=epsilon,
                     gamma=gamma, seed=cfg.seed, rep=0, ledger=result.ledger,
                     grad_norm=result.grad_norm_exact,
                     lambda_min=result.lambda_min_exact, success=success,
                     wall_ms=wall_ms)
    return result, row


@dataclass
class SlopeFit:
    """Least-squares line through (log eps, log median queries)."""

    slope: float
    intercept: float
    r_squared: float
    n_points: int

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept,
                "r_squared": self.r_squared, "n_points": self.n_points}


def fit_loglog(eps_values: np.ndarray, medians: np.ndarray) -> SlopeFit:
    if len(eps_values) < 2:
        raise ConfigError("slope fit needs at least 2 grid points")
    x = np.log(np.asarray(eps_values, dtype=np.float64))
    y = np.log(np.asarray(medians, dtype=np.float64))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return SlopeFit(slope=float(slope), intercept=float(intercept),
                    r_squared=float(r2), n_points=len(eps_values))


@dataclass
class SweepOutcome:
    rows: list[dict]
    fp_rows: list[dict]
    fit: SlopeFit | None
    points: list[dict]
    fit_metric: str = "total"
    warnings: list[str] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "fit_metric": self.fit_metric,
            "fit": None if self.fit is None else self.fit.to_dict(),
            "points": self.points,
            "warnings": self.warnings,
        }


def _floor_queries(cfg: ExperimentConfig, problem: ProblemInstance,
                   noise: NoiseParams, epsilon: float) -> int:
    """Cheapest possible total query count for one run at this epsilon."""
    algorithm = cfg.require("algorithm")
    overrides = cfg.get("overrides")
    if algorithm == "sgd":
        _, horizon = sgd_schedule(problem, noise, epsilon, cfg)
        return horizon
    reg = problem.regularity
    if algorithm == "sgd_hvp_rvr":
        params, _ = solvers.apply_overrides(
            solvers.sgd_rvr_params(reg, noise, epsilon), overrides)
        return params["T"]
    if algorithm == "cubic_rvr":
        params, _ = solvers.apply_overrides(
            solvers.cubic_rvr_params(reg, noise, epsilon, problem.dim),
            overrides)
        return params["T"] * (params["n_H"] + 1)
    if algorithm == "sosp_hvp":
        params, _ = solvers.apply_overrides(
            solvers.sosp_hvp_params(reg, noise, epsilon,
                                    float(cfg.require("gamma"))), overrides)
        return params["T"]
    params, _ = solvers.apply_overrides(
        solvers.sosp_cubic_params(reg, noise, epsilon,
                                  float(cfg.require("gamma")), problem.dim),
        overrides)
    return params["T"] * (1 + min(params["n1"], params["n2"]))


def _one_rep(command: str, cfg_data: dict, eps_index: int, rep: int
             ) -> tuple[dict, dict]:
    """Worker body for one (epsilon, replication) cell; must be picklable."""
    cfg = ExperimentConfig(command=command, data=cfg_data)
    grid = cfg.require("epsilon_grid")
    epsilon = float(grid[eps_index])
    gamma = cfg.get("gamma")
    seed = derive_seed(cfg.seed, command, eps_index, rep)
    t0 = time.perf_counter()
    result = _run_single(cfg, epsilon, seed)
    wall_ms = (time.perf_counter() - t0) * 1e3
    success = result.first_passage_step is not None
    row = result_row(command=command, algorithm=result.algorithm, eps=epsilon,
                     gamma=gamma, seed=seed, rep=rep, ledger=result.ledger,
                     grad_norm=result.grad_norm_exact,
                     lambda_min=result.lambda_min_exact, success=success,
                     wall_ms=wall_ms)
    fp = first_passage_row(command=command, algorithm=result.algorithm,
                           eps=epsilon, gamma=gamma, seed=seed, rep=rep,
                           fp_step=result.first_passage_step,
                           fp_queries=result.first_passage_queries,
                           success=success)
    return row, fp


def _batched_sgd_point(cfg: ExperimentConfig, eps_index: int, reps: int
                       ) -> tuple[list[dict], list[dict]]:
    """All replications of the SGD baseline at one grid point, in lockstep.

    The batch shares one noise stream, so the per-replication seed
    derivation does not apply here; the batch seed is derived from
    (master, command, eps index) and reproducibility holds batch-wide.

    Each replication is charged its committed budget of one gradient
    query per horizon step.  Simulation short-circuits once every
    replication's first passage is resolved, since the remaining steps
    cannot change any emitted number but wall time.
    """
    grid = cfg.require("epsilon_grid")
    epsilon = float(grid[eps_index])
    problem = build_problem(cfg)
    noise = build_noise(cfg)
    step, horizon = sgd_schedule(problem, noise, epsilon, cfg)
    seed = derive_seed(cfg.seed, cfg.command, eps_index)
    t0 = time.perf_counter()
    fp_q, ok, X, _ = solvers.sgd_baseline_batch(
        problem, noise, epsilon, step_size=step, horizon=horizon,
        n_reps=reps, seed=seed)
    wall_ms = (time.perf_counter() - t0) * 1e3 / max(1, reps)
    grads = problem.grad_many(X)
    gnorms = np.linalg.norm(grads, axis=1)
    rows, fp_rows = [], []
    for rep in range(reps):
        ledger = QueryLedger(grad=horizon)
        lam = problem.lambda_min(X[rep])
        rows.append(result_row(
            command=cfg.command, algorithm="sgd", eps=epsilon, gamma=None,
            seed=seed, rep=rep, ledger=ledger, grad_norm=float(gnorms[rep]),
            lambda_min=lam, success=bool(ok[rep]), wall_ms=wall_ms))
        fp_rows.append(first_passage_row(
            command=cfg.command, algorithm="sgd", eps=epsilon, gamma=None,
            seed=seed, rep=rep,
            fp_step=None if not ok[rep] else int(fp_q[rep]),
            fp_queries=None if not ok[rep] else int(fp_q[rep]),
            success=bool(ok[rep])))
    return rows, fp_rows


def run_sweep(cfg: ExperimentConfig) -> SweepOutcome:
    """Queries-to-success over the epsilon grid, with a log-log slope fit.

    Grid points whose cheapest run would exceed the budget cap are dropped
    up front with a warning instead of burning the budget; points where no
    replication succeeds are excluded from the fit the same way.  A
    decrease of the median against a larger epsilon is flagged as a
    warning, never an error: small grids are allowed to be noisy.
    """
    grid = [float(e) for e in cfg.require("epsilon_grid")]
    reps = int(cfg.require("replications"))
    algorithm = cfg.require("algorithm")
    budget_cap = int(cfg.get("budget_cap", solvers.DEFAULT_BUDGET_CAP))
    fit_metric = str(cfg.get("fit_metric", "total"))
    if fit_metric not in ("total", "first_passage"):
        raise ConfigError(
            f"fit_metric must be 'total' or 'first_passage', got {fit_metric!r}")
    problem = build_problem(cfg)
    noise = build_noise(cfg)
    batched = bool(cfg.get("batched", algorithm == "sgd"))
    if batched and algorithm != "sgd":
        raise ConfigError("batched sweeps are only available for sgd")

    rows: list[dict] = []
    fp_rows: list[dict] = []
    warnings: list[str] = []
    live_points: list[int] = []
    for i, epsilon in enumerate(grid):
        floor = _floor_queries(cfg, problem, noise, epsilon)
        if floor > budget_cap:
            warnings.append(
                f"eps={epsilon}: dropped, needs >= {floor} queries "
                f"> budget cap {budget_cap}")
            continue
        live_points.append(i)

    if batched:
        for i in live_points:
            point_rows, point_fp = _batched_sgd_point(cfg, i, reps)
            rows.extend(point_rows)
            fp_rows.extend(point_fp)
    else:
        cells = [(i, rep) for i in live_points for rep in range(reps)]
        workers = worker_count()
        if workers > 1 and len(cells) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(
                    _one_rep,
                    [cfg.command] * len(cells),
                    [cfg.data] * len(cells),
                    [c[0] for c in cells],
                    [c[1] for c in cells]))
        else:
            results = [_one_rep(cfg.command, cfg.data, i, rep)
                       for i, rep in cells]
        for row, fp in results:
            rows.append(row)
            fp_rows.append(fp)

    points: list[dict] = []
    fit_eps: list[float] = []
    fit_median: list[float] = []
    for i in live_points:
        epsilon = grid[i]
        queries: list[float] = []
        n_total = 0
        for row, fp in zip(rows, fp_rows):
            if row["eps"] != epsilon:
                continue
            n_total += 1
            if not row["success"]:
                continue
            if fit_metric == "total":
                queries.append(float(row["queries_grad"] + row["queries_hvp"]
                                     + row["queries_hess"]))
            else:
                queries.append(float(fp["fp_queries"]))
        point = {"eps": epsilon, "n_success": len(queries),
                 "n_total": n_total,
                 "median_queries": None if not queries
                 else float(np.median(queries))}
        points.append(point)
        if not queries:
            warnings.append(f"eps={epsilon}: no successful replication; "
                            "excluded from fit")
            continue
        fit_eps.append(epsilon)
        fit_median.append(float(np.median(queries)))
    for a in range(len(fit_eps) - 1):
        if fit_median[a + 1] < fit_median[a]:
            warnings.append(
                f"monotonicity: median queries fell from {fit_median[a]} at "
                f"eps={fit_eps[a]} to {fit_median[a + 1]} at "
                f"eps={fit_eps[a + 1]}")
    fit = None
    if len(fit_eps) >= 2:
        fit = fit_loglog(np.asarray(fit_eps), np.asarray(fit_median))
    elif live_points:
        warnings.append("fewer than 2 grid points usable; no slope fit")
    return SweepOutcome(rows=rows, fp_rows=fp_rows, fit=fit, points=points,
                        fit_metric=fit_metric, warnings=warnings)
