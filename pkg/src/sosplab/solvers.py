"""Top-level stochastic optimization algorithms.

Five runners share one result shape:

* ``sgd_baseline``: plain stochastic gradient descent, the 1/eps^4
  query-complexity comparator;
* ``sgd_hvp_rvr``: gradient descent on the variance-reduced estimator
  (fresh gradient batches plus Hessian-vector transport);
* ``cubic_rvr``: ball-constrained cubic steps on subsampled Hessians with
  the variance-reduced gradient;
* ``sosp_hvp``: gradient steps interleaved with a stochastic power-iteration
  negative-curvature search, reaching second-order stationarity from
  gradient and HVP queries alone;
* ``sosp_cubic``: cubic steps interleaved with an explicit eigensolve
  curvature branch on subsampled Hessians.

Each runner derives its parameters from closed-form rules in the target
accuracy and the instance regularity (the ``*_params`` functions, exposed
for independent recomputation); ``overrides`` substitutes named parameters
for tuned-mode experiments and the result records which mode produced it.
Runs are deterministic given (seed, config): the reset coins, branch coins,
output index, and oracle noise each live on their own derived stream.

Exact diagnostics (gradient norm, smallest Hessian eigenvalue at the output
point, optional first-passage tracking) are computed from the true objective
and never touch the query ledger.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._rng import derive_seed, make_generator
from .core.oracle import NoiseParams, QueryLedger, StochasticOracle
from .core.problems import ProblemInstance, RegularityParams
from .errors import BudgetExceeded, ConfigError, ContractViolation
from .hvp_rvr import EstimatorState, estimate, make_rvr_params
from .subproblems.cubic import CubicModel, solve_cubic_tr
from .subproblems.curvature import curvature_step, exact_curvature_direction, oja_search

DEFAULT_BUDGET_CAP = 10**8
_MAX_KEPT_ITERATES = 10_000


def _log_dim(dim: int) -> float:
    """Natural log of the dimension, floored at 1 so tiny d keeps samples."""
    return max(1.0, math.log(dim))


# ---------------------------------------------------------------------------
# parameter rules


def sgd_rvr_params(regularity: RegularityParams, noise: NoiseParams,
                   epsilon: float) -> dict:
    """Step size, horizon and reset probability for the RVR gradient method:

        eta = 1 / (2 sqrt(l1^2 + sigma2^2 + eps l2)),
        T   = ceil(2 delta / (eta eps^2)),
        b   = min{1, eta eps sqrt(sigma2^2 + eps l2) / sigma1}.
    """
    if epsilon <= 0:
        raise ConfigError("epsilon must be > 0")
    l1, l2, delta = regularity.l1, regularity.l2, regularity.delta
    s2sq = noise.sigma2**2
    eta = 1.0 / (2.0 * math.sqrt(l1**2 + s2sq + epsilon * l2))
    T = math.ceil(2.0 * delta / (eta * epsilon**2))
    if noise.sigma1 == 0.0:
        b = 1.0
    else:
        b = min(1.0, eta * epsilon * math.sqrt(s2sq + epsilon * l2) / noise.sigma1)
    return {"eta": eta, "T": T, "b": b}


def cubic_rvr_params(regularity: RegularityParams, noise: NoiseParams,
                     epsilon: float, dim: int) -> dict:
    """Cubic-step parameters:

        M   = 5 max{l2, eps sigma2^2 log(d) / sigma1^2},
        eta = 25 sqrt(eps / M),
        T   = ceil(5 delta / (3 eta eps)),
        n_H = ceil(22 sigma2^2 eta^2 log(d) / eps^2),
        b   = min{1, eta sqrt(sigma2^2 + eps l2) / (25 sigma1)}.
    """
    if epsilon <= 0:
        raise ConfigError("epsilon must be > 0")
    l2, delta = regularity.l2, regularity.delta
    s1, s2 = noise.sigma1, noise.sigma2
    logd = _log_dim(dim)
    if s1 == 0.0:
        M = 5.0 * l2
    else:
        M = 5.0 * max(l2, epsilon * s2**2 * logd / s1**2)
    eta = 25.0 * math.sqrt(epsilon / M)
    T = math.ceil(5.0 * delta / (3.0 * eta * epsilon))
    n_H = max(1, math.ceil(22.0 * s2**2 * eta**2 * logd / epsilon**2))
    if s1 == 0.0:
        b = 1.0
    else:
        b = min(1.0, eta * math.sqrt(s2**2 + epsilon * l2) / (25.0 * s1))
    return {"M": M, "eta": eta, "T": T, "n_H": n_H, "b": b}


def sosp_hvp_params(regularity: RegularityParams, noise: NoiseParams,
                    epsilon: float, gamma: float,
                    oja_delta: float | None = None) -> dict:
    """Gradient/curvature alternation parameters (HVP flavor):

        eta = min{gamma/(eps l2), 1/(2 sqrt(l1^2 + sigma2_as^2 + eps l2))},
        T   = ceil(20 delta l2^2/gamma^3 + 2 delta/(eta eps^2)),
        p   = gamma^3 / (gamma^3 + 10 delta l2^2 eta eps^2),
        b_g = min{1, eta eps sqrt(sigma2_as^2 + eps l2) / sigma1},
        b_H = min{1, gamma sqrt(sigma2_as^2 + eps l2) / (sigma1 l2)},

    with the curvature-search failure budget defaulting to
    gamma / (1600 max(l1, l2)).
    """
    if epsilon <= 0 or gamma <= 0:
        raise ConfigError("epsilon and gamma must be > 0")
    l1, l2, delta = regularity.l1, regularity.l2, regularity.delta
    s2as = noise.sigma2_as_effective
    cushion = math.sqrt(s2as**2 + epsilon * l2)
    eta = min(gamma / (epsilon * l2),
              1.0 / (2.0 * math.sqrt(l1**2 + s2as**2 + epsilon * l2)))
    T = math.ceil(20.0 * delta * l2**2 / gamma**3 + 2.0 * delta / (eta * epsilon**2))
    p = gamma**3 / (gamma**3 + 10.0 * delta * l2**2 * eta * epsilon**2)
    if noise.sigma1 == 0.0:
        b_g, b_H = 1.0, 1.0
    else:
        b_g = min(1.0, eta * epsilon * cushion / noise.sigma1)
        b_H = min(1.0, gamma * cushion / (noise.sigma1 * l2))
    if oja_delta is None:
        oja_delta = gamma / (1600.0 * max(l1, l2))
    return {"eta": eta, "T": T, "p": p, "b_g": b_g, "b_H": b_H,
            "oja_delta": oja_delta}


def sosp_cubic_params(regularity: RegularityParams, noise: NoiseParams,
                      epsilon: float, gamma: float, dim: int) -> dict:
    """Cubic/curvature alternation parameters:

        M   = 4 max{l2, sigma2^2 eps log(d) / sigma1^2},
        eta = 30 sqrt(eps / M),
        T   = ceil(18 delta l2^2/gamma^3 + delta sqrt(M)/(30 eps^{3/2})),
        p   = sqrt(M) gamma^{3/2} / (sqrt(M) gamma^{3/2} + 540 l2^2 eps^{3/2}),
        n1  = ceil(2e4 sigma2^2 log(d) / (eps M)),
        n2  = ceil(440 sigma2^2 log(d) / gamma^2),
        b_g = min{1, eta sqrt(sigma2^2 + eps l2) / (30 sigma1)},
        b_H = min{1, gamma sqrt(sigma2^2 + eps l2) / (sigma1 l2)}.
    """
    if epsilon <= 0 or gamma <= 0:
        raise ConfigError("epsilon and gamma must be > 0")
    l2, delta = regularity.l2, regularity.delta
    s1, s2 = noise.sigma1, noise.sigma2
    logd = _log_dim(dim)
    if s1 == 0.0:
        M = 4.0 * l2
    else:
        M = 4.0 * max(l2, s2**2 * epsilon * logd / s1**2)
    eta = 30.0 * math.sqrt(epsilon / M)
    T = math.ceil(18.0 * delta * l2**2 / gamma**3
                  + delta * math.sqrt(M) / (30.0 * epsilon**1.5))
    p = math.sqrt(M) * gamma**1.5 / (math.sqrt(M) * gamma**1.5
                                     + 540.0 * l2**2 * epsilon**1.5)
    n1 = max(1, math.ceil(2.0e4 * s2**2 * logd / (epsilon * M)))
    n2 = max(1, math.ceil(440.0 * s2**2 * logd / gamma**2))
    cushion = math.sqrt(s2**2 + epsilon * l2)
    if s1 == 0.0:
        b_g, b_H = 1.0, 1.0
    else:
        b_g = min(1.0, eta * cushion / (30.0 * s1))
        b_H = min(1.0, gamma * cushion / (s1 * l2))
    return {"M": M, "eta": eta, "T": T, "p": p, "n1": n1, "n2": n2,
            "b_g": b_g, "b_H": b_H}


_INT_PARAMS = {"T", "n_H", "n1", "n2"}
_PROB_PARAMS = {"b", "b_g", "b_H", "p"}


def apply_overrides(params: dict, overrides: dict | None) -> tuple[dict, str]:
    """Substitute named parameters; returns (params, mode).

    mode is "theory" when nothing was overridden, "tuned" otherwise.
    Unknown keys and out-of-range values are configuration errors.
    """
    if not overrides:
        return dict(params), "theory"
    out = dict(params)
    for key, value in overrides.items():
        if key not in params:
            raise ConfigError(f"unknown parameter override {key!r}; "
                              f"valid keys: {sorted(params)}")
        if key in _INT_PARAMS:
            if int(value) != value or value < 1:
                raise ConfigError(f"override {key} must be a positive integer")
            out[key] = int(value)
        elif key in _PROB_PARAMS:
            if not (0.0 < value <= 1.0):
                raise ConfigError(f"override {key} must be in (0, 1]")
            out[key] = float(value)
        else:
            if value <= 0:
                raise ConfigError(f"override {key} must be > 0")
            out[key] = float(value)
    return out, "tuned"


# ---------------------------------------------------------------------------
# run plumbing


@dataclass
class RunResult:
    """Outcome of one solver run with exact output diagnostics."""

    algorithm: str
    output_x: np.ndarray
    output_index: int
    ledger: QueryLedger
    grad_norm_exact: float
    lambda_min_exact: float
    seed: int
    mode: str
    params: dict
    epsilon: float | None = None
    gamma: float | None = None
    iterates: np.ndarray | None = None
    first_passage_step: int | None = None
    first_passage_queries: int | None = None


class _IterateKeeper:
    """Down-samples a trajectory to at most _MAX_KEPT_ITERATES points."""

    def __init__(self, horizon: int, enabled: bool):
        self.enabled = enabled
        self.stride = max(1, math.ceil((horizon + 1) / _MAX_KEPT_ITERATES))
        self.points: list[np.ndarray] = []

    def push(self, t: int, x: np.ndarray):
        if self.enabled and t % self.stride == 0:
            self.points.append(np.asarray(x, dtype=np.float64).copy())

    def finish(self, x_final: np.ndarray) -> np.ndarray | None:
        if not self.enabled:
            return None
        self.points.append(np.asarray(x_final, dtype=np.float64).copy())
        return np.array(self.points)


class _FirstPassage:
    """Tracks the first step where the exact gradient norm crosses below a
    threshold, and the query count spent up to that point."""

    def __init__(self, problem: ProblemInstance, threshold: float | None):
        self.problem = problem
        self.threshold = threshold
        self.step: int | None = None
        self.queries: int | None = None

    def update(self, t: int, x: np.ndarray, ledger: QueryLedger):
        if self.threshold is None or self.step is not None:
            return
        if float(np.linalg.norm(self.problem.grad(x))) <= self.threshold:
            self.step = t
            self.queries = ledger.total


def _budget_floor_check(floor: float, cap: int, algorithm: str):
    if floor > cap:
        raise BudgetExceeded(
            f"{algorithm}: the parameter rules require at least "
            f"{floor:.3g} queries, above the cap {cap:.3g}",
            required=floor)


def _budget_live_check(ledger: QueryLedger, cap: int, t: int, horizon: int,
                       algorithm: str):
    if ledger.total > cap:
        projected = ledger.total * horizon / max(t, 1)
        raise BudgetExceeded(
            f"{algorithm}: query cap {cap:.3g} exhausted at step {t}/{horizon}",
            required=projected)


def _finish(problem: ProblemInstance, algorithm: str, x_out: np.ndarray,
            out_idx: int, ledger: QueryLedger, seed: int, mode: str,
            params: dict, keeper: _IterateKeeper, fp: _FirstPassage,
            x_final: np.ndarray, epsilon: float | None = None,
            gamma: float | None = None) -> RunResult:
    return RunResult(
        algorithm=algorithm,
        output_x=x_out,
        output_index=out_idx,
        ledger=ledger,
        grad_norm_exact=float(np.linalg.norm(problem.grad(x_out))),
        lambda_min_exact=problem.lambda_min(x_out),
        seed=seed,
        mode=mode,
        params=dict(params),
        epsilon=epsilon,
        gamma=gamma,
        iterates=keeper.finish(x_final),
        first_passage_step=fp.step,
        first_passage_queries=fp.queries,
    )


# ---------------------------------------------------------------------------
# solvers


def sgd_baseline(problem: ProblemInstance, noise: NoiseParams, epsilon: float,
                 step_size: float, horizon: int, seed: int,
                 budget_cap: int = DEFAULT_BUDGET_CAP,
                 keep_iterates: bool = False,
                 track_first_passage: bool = False) -> RunResult:
    """Plain SGD: one gradient query per step, uniform output iterate."""
    if step_size > 1.0 / (2.0 * problem.regularity.l1):
        raise ConfigError("step_size must be <= 1/(2 l1)")
    if horizon < 0:
        raise ConfigError("horizon must be >= 0")
    _budget_floor_check(horizon, budget_cap, "sgd")
    oracle = StochasticOracle(problem, noise, seed=derive_seed(seed, "oracle"))
    out_rng = make_generator(derive_seed(seed, "output"))
    out_idx = int(out_rng.integers(0, horizon)) if horizon > 0 else 0
    params = {"eta": step_size, "T": horizon}
    keeper = _IterateKeeper(horizon, keep_iterates)
    fp = _FirstPassage(problem, epsilon if track_first_passage else None)
    x = problem.x0.copy()
    x_out = x.copy()
    fp.update(0, x, oracle.ledger)
    for t in range(horizon):
        keeper.push(t, x)
        if t == out_idx:
            x_out = x.copy()
        g = oracle.grad(x)
        x = x - step_size * g
        fp.update(t + 1, x, oracle.ledger)
        _budget_live_check(oracle.ledger, budget_cap, t + 1, horizon, "sgd")
    return _finish(problem, "sgd", x_out, out_idx, oracle.ledger, seed,
                   "theory", params, keeper, fp, x, epsilon=epsilon)


def sgd_baseline_batch(problem: ProblemInstance, noise: NoiseParams,
                       epsilon: float, step_size: float, horizon: int,
                       n_reps: int, seed: int
                       ) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """Vectorized multi-replication SGD for sweep experiments.

    Runs n_reps independent chains in lockstep (one query per chain per
    step) and returns (first_passage_queries, success, final_iterates,
    steps_run), where first passage is the exact-gradient crossing below
    epsilon.  Chains use a single batch noise stream; replication
    independence comes from the draw layout, and reproducibility is
    defined at the batch level.
    """
    if step_size > 1.0 / (2.0 * problem.regularity.l1):
        raise ConfigError("step_size must be <= 1/(2 l1)")
    rng = make_generator(derive_seed(seed, "sgd-batch"))
    d = problem.dim
    X = np.tile(problem.x0, (n_reps, 1))
    fp = np.full(n_reps, np.nan)
    steps_run = 0
    for t in range(horizon):
        G = problem.grad_many(X)
        norms = np.linalg.norm(G, axis=1)
        newly = np.isnan(fp) & (norms <= epsilon)
        fp[newly] = t  # queries spent so far: one per prior step
        if not np.isnan(fp).any():
            break
        if noise.sigma1 > 0.0:
            Z = rng.standard_normal((n_reps, d))
            if noise.law == "gaussian":
                G = G + (noise.sigma1 / math.sqrt(d)) * Z
            else:
                nrm = np.linalg.norm(Z, axis=1, keepdims=True)
                nrm[nrm == 0.0] = 1.0
                s = 2.0 * rng.integers(0, 2, size=(n_reps, 1)) - 1.0
                G = G + noise.sigma1 * s * (Z / nrm)
        X = X - step_size * G
        steps_run = t + 1
    return fp, ~np.isnan(fp), X, steps_run


def sgd_hvp_rvr(problem: ProblemInstance, noise: NoiseParams, epsilon: float,
                seed: int, overrides: dict | None = None,
                budget_cap: int = DEFAULT_BUDGET_CAP,
                keep_iterates: bool = False,
                track_first_passage: bool = False) -> RunResult:
    """Gradient descent on the variance-reduced estimator."""
    params, mode = apply_overrides(
        sgd_rvr_params(problem.regularity, noise, epsilon), overrides)
    eta, T, b = params["eta"], params["T"], params["b"]
    _budget_floor_check(T, budget_cap, "sgd_hvp_rvr")
    oracle = StochasticOracle(problem, noise, seed=derive_seed(seed, "oracle"))
    coin_rng = make_generator(derive_seed(seed, "coins"))
    out_idx = int(make_generator(derive_seed(seed, "output")).integers(1, T + 1))
    est_params = make_rvr_params(epsilon=epsilon, reset_prob=b,
                                 sigma1=noise.sigma1, sigma2=noise.sigma2,
                                 l2=problem.regularity.l2)
    keeper = _IterateKeeper(T, keep_iterates)
    fp = _FirstPassage(problem, epsilon if track_first_passage else None)
    x = problem.x0.copy()
    x_out = x.copy()
    state: EstimatorState | None = None
    fp.update(0, x, oracle.ledger)
    for t in range(1, T + 1):
        keeper.push(t, x)
        if t == out_idx:
            x_out = x.copy()
        g, state = estimate(oracle, x, state, est_params, coin_rng)
        x = x - eta * g
        fp.update(t, x, oracle.ledger)
        _budget_live_check(oracle.ledger, budget_cap, t, T, "sgd_hvp_rvr")
    return _finish(problem, "sgd_hvp_rvr", x_out, out_idx, oracle.ledger,
                   seed, mode, params, keeper, fp, x, epsilon=epsilon)


def cubic_rvr(problem: ProblemInstance, noise: NoiseParams, epsilon: float,
              seed: int, overrides: dict | None = None,
              budget_cap: int = DEFAULT_BUDGET_CAP,
              keep_iterates: bool = False,
              track_first_passage: bool = False) -> RunResult:
    """Ball-constrained cubic steps on subsampled Hessians with the
    variance-reduced gradient; outputs a uniform iterate from step 2 on."""
    params, mode = apply_overrides(
        cubic_rvr_params(problem.regularity, noise, epsilon, problem.dim),
        overrides)
    M, eta, T, n_H, b = (params["M"], params["eta"], params["T"],
                         params["n_H"], params["b"])
    _budget_floor_check(T * (n_H + 1), budget_cap, "cubic_rvr")
    oracle = StochasticOracle(problem, noise, seed=derive_seed(seed, "oracle"))
    coin_rng = make_generator(derive_seed(seed, "coins"))
    out_idx = int(make_generator(derive_seed(seed, "output")).integers(2, T + 2))
    est_params = make_rvr_params(epsilon=epsilon, reset_prob=b,
                                 sigma1=noise.sigma1, sigma2=noise.sigma2,
                                 l2=problem.regularity.l2)
    keeper = _IterateKeeper(T + 1, keep_iterates)
    fp = _FirstPassage(problem, epsilon if track_first_passage else None)
    x = problem.x0.copy()
    x_out = x.copy()
    state: EstimatorState | None = None
    fp.update(0, x, oracle.ledger)
    for t in range(1, T + 1):
        keeper.push(t, x)
        g, state = estimate(oracle, x, state, est_params, coin_rng)
        H = oracle.hess_mean(x, n_H)
        step = solve_cubic_tr(CubicModel(g=g, H=H, M=M, radius=eta))
        x = x + step.s
        if t + 1 == out_idx:
            x_out = x.copy()
        fp.update(t, x, oracle.ledger)
        _budget_live_check(oracle.ledger, budget_cap, t, T, "cubic_rvr")
    return _finish(problem, "cubic_rvr", x_out, out_idx, oracle.ledger,
                   seed, mode, params, keeper, fp, x, epsilon=epsilon)


def sosp_hvp(problem: ProblemInstance, noise: NoiseParams, epsilon: float,
             gamma: float, seed: int, overrides: dict | None = None,
             budget_cap: int = DEFAULT_BUDGET_CAP,
             keep_iterates: bool = False,
             track_first_passage: bool = False) -> RunResult:
    """Gradient steps interleaved with negative-curvature exploitation,
    using only gradient and HVP queries."""
    params, mode = apply_overrides(
        sosp_hvp_params(problem.regularity, noise, epsilon, gamma), overrides)
    eta, T, p = params["eta"], params["T"], params["p"]
    b_g, b_H, oja_delta = params["b_g"], params["b_H"], params["oja_delta"]
    _budget_floor_check(T, budget_cap, "sosp_hvp")
    if getattr(noise, "sigma2_as_effective", None) is None:
        raise ContractViolation("an almost-sure Hessian noise bound is required")
    l2 = problem.regularity.l2
    oracle = StochasticOracle(problem, noise, seed=derive_seed(seed, "oracle"))
    coin_rng = make_generator(derive_seed(seed, "coins"))
    oja_rng = make_generator(derive_seed(seed, "oja"))
    out_idx = int(make_generator(derive_seed(seed, "output")).integers(1, T + 1))
    est_params = make_rvr_params(epsilon=epsilon, reset_prob=b_g,
                                 sigma1=noise.sigma1, sigma2=noise.sigma2,
                                 l2=l2)
    keeper = _IterateKeeper(T, keep_iterates)
    fp = _FirstPassage(problem, epsilon if track_first_passage else None)
    x = problem.x0.copy()
    x_out = x.copy()
    g, state = estimate(oracle, x, None, est_params, coin_rng, reset_prob=b_g)
    fp.update(0, x, oracle.ledger)
    for t in range(1, T + 1):
        keeper.push(t, x)
        if t == out_idx:
            x_out = x.copy()
        if coin_rng.random() < p:
            x_new = x - eta * g
            g, state = estimate(oracle, x_new, state, est_params, coin_rng,
                                reset_prob=b_g)
        else:
            found = oja_search(oracle, x, 2.0 * gamma, oja_delta, oja_rng)
            if found.direction is None:
                x_new = x
            else:
                x_new = curvature_step(x, found.direction, gamma, l2, coin_rng)
                g, state = estimate(oracle, x_new, state, est_params, coin_rng,
                                    reset_prob=b_H)
        x = x_new
        fp.update(t, x, oracle.ledger)
        _budget_live_check(oracle.ledger, budget_cap, t, T, "sosp_hvp")
    return _finish(problem, "sosp_hvp", x_out, out_idx, oracle.ledger, seed,
                   mode, params, keeper, fp, x, epsilon=epsilon, gamma=gamma)


def sosp_cubic(problem: ProblemInstance, noise: NoiseParams, epsilon: float,
               gamma: float, seed: int, overrides: dict | None = None,
               budget_cap: int = DEFAULT_BUDGET_CAP,
               keep_iterates: bool = False,
               track_first_passage: bool = False) -> RunResult:
    """Cubic steps interleaved with an explicit curvature branch on
    subsampled Hessians; outputs a uniform iterate from the first T-1."""
    params, mode = apply_overrides(
        sosp_cubic_params(problem.regularity, noise, epsilon, gamma,
                          problem.dim), overrides)
    M, eta, T, p = params["M"], params["eta"], params["T"], params["p"]
    n1, n2, b_g, b_H = params["n1"], params["n2"], params["b_g"], params["b_H"]
    if T < 2:
        raise ConfigError("sosp_cubic needs T >= 2 for its output range")
    _budget_floor_check(T * (1 + min(n1, n2)), budget_cap, "sosp_cubic")
    l2 = problem.regularity.l2
    oracle = StochasticOracle(problem, noise, seed=derive_seed(seed, "oracle"))
    coin_rng = make_generator(derive_seed(seed, "coins"))
    out_idx = int(make_generator(derive_seed(seed, "output")).integers(1, T))
    est_params = make_rvr_params(epsilon=epsilon, reset_prob=b_g,
                                 sigma1=noise.sigma1, sigma2=noise.sigma2,
                                 l2=l2)
    keeper = _IterateKeeper(T, keep_iterates)
    fp = _FirstPassage(problem, epsilon if track_first_passage else None)
    x = problem.x0.copy()
    x_out = x.copy()
    g, state = estimate(oracle, x, None, est_params, coin_rng, reset_prob=b_g)
    fp.update(0, x, oracle.ledger)
    for t in range(1, T + 1):
        keeper.push(t, x)
        if t == out_idx:
            x_out = x.copy()
        if coin_rng.random() < p:
            H = oracle.hess_mean(x, n1)
            step = solve_cubic_tr(CubicModel(g=g, H=H, M=M, radius=eta))
            x_new = x + step.s
            g, state = estimate(oracle, x_new, state, est_params, coin_rng,
                                reset_prob=b_g)
        else:
            H = oracle.hess_mean(x, n2)
            u = exact_curvature_direction(H, gamma)
            if u is None:
                x_new = x
            else:
                x_new = curvature_step(x, u, gamma, l2, coin_rng)
                g, state = estimate(oracle, x_new, state, est_params, coin_rng,
                                    reset_prob=b_H)
        x = x_new
        fp.update(t, x, oracle.ledger)
        _budget_live_check(oracle.ledger, budget_cap, t, T, "sosp_cubic")
    return _finish(problem, "sosp_cubic", x_out, out_idx, oracle.ledger,
                   seed, mode, params, keeper, fp, x, epsilon=epsilon,
                   gamma=gamma)
