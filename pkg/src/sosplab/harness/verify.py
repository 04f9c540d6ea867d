"""Executable property checks, grouped into named suites.

Each check exercises one contract the implementation relies on: exact
oracle noise laws, estimator error and query budgets, subproblem solver
optimality, the per-step descent inequalities behind the solvers, and
the structural guarantees of the hard instances.  Checks return a
CheckResult with a margin; conventionally margin >= 1 means the property
held with that much multiplicative headroom.

The same checks back the ``verify`` CLI subcommand and the test suite,
so a red check is visible both interactively and under pytest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .. import solvers
from .._rng import derive_seed, make_generator
from ..core.oracle import (FiniteSumOracle, NoiseParams, SignRadialOracle,
                           StochasticOracle)
from ..core.problems import (FiniteSumProblem, LambdaSumProblem,
                             QuadraticProblem, RegularityParams)
from ..errors import ConfigError
from ..hard_instances import (ChainFunction, ZeroChainOracle,
                              audit_hard_instance, build_eps_hard_instance,
                              build_gamma_hard_instance, chain_eval,
                              lambda_fn, phi, prog, progress_bound, psi,
                              slice_support, zero_respecting_run)
from ..hvp_rvr import (EstimatorState, estimate, estimator_error_suite,
                       expected_query_budget, make_rvr_params)
from ..subproblems.cubic import (CubicModel, brute_force_value, model_value,
                                 solve_cubic_tr)
from ..subproblems.curvature import (curvature_step,
                                     exact_curvature_direction, oja_search)

DEFAULT_SEED = 2026
_BIG = 1e12


@dataclass
class CheckResult:
    name: str
    passed: bool
    margin: float
    detail: str

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed,
                "margin": self.margin, "detail": self.detail}


def _ratio(allowance: float, observed: float) -> float:
    if observed <= 0.0:
        return _BIG
    return min(_BIG, allowance / observed)


def _offsets_instance(seed: int, dim: int, scale: float = 1.0
                      ) -> LambdaSumProblem:
    rng = make_generator(derive_seed(seed, "instance"))
    return LambdaSumProblem(dim, offsets=rng.uniform(-1.0, 1.0, dim),
                            scale=scale, x0=rng.uniform(-1.0, 1.0, dim))


# ---------------------------------------------------------------------------
# core oracle suite


def check_noise_draw_norms(seed: int = DEFAULT_SEED) -> CheckResult:
    """Rank-one noise law: every draw misses by exactly sigma per channel."""
    problem = _offsets_instance(seed, 6)
    noise = NoiseParams(sigma1=1.3, sigma2=0.7)
    oracle = StochasticOracle(problem, noise, seed=derive_seed(seed, "oracle"))
    rng = make_generator(derive_seed(seed, "points"))
    worst = 0.0
    for _ in range(200):
        x = rng.uniform(-2.0, 2.0, 6)
        g = oracle.grad(x)
        worst = max(worst, abs(float(np.linalg.norm(g - problem.grad(x))) - 1.3))
        H = oracle.hess(x)
        dev = H - problem.hess(x)
        worst = max(worst, abs(float(np.linalg.norm(dev)) - 0.7))
        worst = max(worst, float(np.abs(dev - dev.T).max()))
    passed = worst < 1e-9
    return CheckResult("noise_draw_norms", passed, _ratio(1e-9, worst),
                       f"max per-draw norm deviation {worst:.3e}")


def check_unbiased_moments(seed: int = DEFAULT_SEED) -> CheckResult:
    """Monte Carlo means of both channels within 4 standard errors."""
    problem = _offsets_instance(seed, 6)
    noise = NoiseParams(sigma1=1.0, sigma2=0.8)
    oracle = StochasticOracle(problem, noise, seed=derive_seed(seed, "oracle"))
    x = make_generator(derive_seed(seed, "x")).uniform(-1.5, 1.5, 6)
    n = 20000
    g_err = float(np.linalg.norm(oracle.grad_mean(x, n) - problem.grad(x)))
    g_band = 4.0 * noise.sigma1 / math.sqrt(n)
    H_err = float(np.linalg.norm(oracle.hess_mean(x, n) - problem.hess(x), ord=2))
    H_band = 4.0 * noise.sigma2 / math.sqrt(n)
    margin = min(_ratio(g_band, g_err), _ratio(H_band, H_err))
    passed = g_err <= g_band and H_err <= H_band
    return CheckResult("unbiased_moments", passed, margin,
                       f"grad err {g_err:.2e} (band {g_band:.2e}), "
                       f"hess op err {H_err:.2e} (band {H_band:.2e})")


def check_shared_draw_coupling(seed: int = DEFAULT_SEED) -> CheckResult:
    """n_point mode reuses one draw across points; single_point does not."""
    problem = _offsets_instance(seed, 5)
    rng = make_generator(derive_seed(seed, "pts"))
    x, y = rng.uniform(-1, 1, 5), rng.uniform(-1, 1, 5)
    shared = StochasticOracle(
        problem, NoiseParams(sigma1=1.0, sigma2=0.5, mode="n_point"),
        seed=derive_seed(seed, "s"))
    gx, gy = shared.grad_shared([x, y])
    dev = float(np.abs((gx - problem.grad(x)) - (gy - problem.grad(y))).max())
    fresh = StochasticOracle(problem, NoiseParams(sigma1=1.0, sigma2=0.5),
                             seed=derive_seed(seed, "f"))
    n1 = fresh.grad(x) - problem.grad(x)
    n2 = fresh.grad(x) - problem.grad(x)
    independent = float(np.abs(n1 - n2).max()) > 1e-6
    passed = dev < 1e-12 and independent
    return CheckResult("shared_draw_coupling", passed, _ratio(1e-12, dev),
                       f"shared-noise gap {dev:.2e}; fresh draws differ: "
                       f"{independent}")


def check_hvp_path_telescope(seed: int = DEFAULT_SEED) -> CheckResult:
    """On a quadratic, the HVP path sum transports gradients exactly."""
    rng = make_generator(derive_seed(seed, "quad"))
    B = rng.standard_normal((5, 5))
    problem = QuadraticProblem(A=(B + B.T) / 2.0, b=rng.standard_normal(5),
                               l2=1.0, delta=10.0)
    oracle = StochasticOracle(problem, NoiseParams(), seed=seed)
    x_prev = rng.uniform(-1, 1, 5)
    x = x_prev + rng.uniform(-0.5, 0.5, 5)
    moved = problem.grad(x_prev) + oracle.hvp_path_sum(x_prev, x, 7)
    err = float(np.linalg.norm(moved - problem.grad(x)))
    passed = err < 1e-12
    return CheckResult("hvp_path_telescope", passed, _ratio(1e-12, err),
                       f"transport error {err:.2e} across K=7 path steps")


def check_matrix_concentration(seed: int = DEFAULT_SEED,
                               cases: tuple = ((10, 100, 1.0), (25, 150, 0.5)),
                               reps: int = 300) -> CheckResult:
    """Mean squared operator error of n-sample Hessian means is at most
    22 sigma^2 log(d) / n."""
    worst_margin = _BIG
    details = []
    ok = True
    for d, n, sigma in cases:
        problem = _offsets_instance(derive_seed(seed, d), d)
        noise = NoiseParams(sigma2=sigma)
        oracle = StochasticOracle(problem, noise,
                                  seed=derive_seed(seed, "mc", d))
        x = make_generator(derive_seed(seed, "x", d)).uniform(-1, 1, d)
        H = problem.hess(x)
        errs = np.empty(reps)
        for r in range(reps):
            errs[r] = np.linalg.norm(oracle.hess_mean(x, n) - H, ord=2) ** 2
        measured = float(errs.mean())
        bound = 22.0 * sigma**2 * math.log(d) / n
        ok = ok and measured <= bound
        worst_margin = min(worst_margin, _ratio(bound, measured))
        details.append(f"d={d},n={n}: {measured:.4f} <= {bound:.4f}")
    return CheckResult("matrix_concentration", ok, worst_margin,
                       "; ".join(details))


def check_mss_counterexample(seed: int = DEFAULT_SEED) -> CheckResult:
    """Bounded variance does not imply mean-squared smoothness.

    The subsampling oracle's MSS quotient equals its Hessian spread
    exactly; the sign-radial oracle's quotient blows up as the two query
    points approach the origin together.
    """
    fs = FiniteSumProblem("quadratic", dim=4, n_components=6, spread=0.5,
                          seed=3)
    fs_oracle = FiniteSumOracle(fs, seed=derive_seed(seed, "fs"))
    rng = make_generator(derive_seed(seed, "mss"))
    x = rng.uniform(-1, 1, 4)
    y = x + rng.uniform(-0.5, 0.5, 4)
    quotients = []
    for _ in range(400):
        gx, gy = fs_oracle.grad_shared([x, y])
        dev = (gx - gy) - (fs.grad(x) - fs.grad(y))
        quotients.append(float(dev @ dev) / float((x - y) @ (x - y)))
    fs_quotient = float(np.mean(quotients))

    quad = QuadraticProblem(A=np.eye(3), b=np.zeros(3), l2=1.0)
    sr = SignRadialOracle(quad, seed=derive_seed(seed, "sr"))

    def sr_quotient(scale: float) -> float:
        p = scale * np.array([1.0, 0.0, 0.0])
        vals = []
        for _ in range(200):
            gp, gm = sr.grad_shared([p, -p])
            dev = (gp - gm) - (quad.grad(p) - quad.grad(-p))
            vals.append(float(dev @ dev) / float(4.0 * scale**2))
        return float(np.mean(vals))

    growth = sr_quotient(1e-3) / sr_quotient(1e-1)
    fs_ok = fs_quotient <= fs.spread**2 * (1.0 + 1e-9)
    sr_ok = growth >= 100.0  # quotient scales like 1/scale^2: exact 1e4
    passed = fs_ok and sr_ok
    return CheckResult(
        "mss_counterexample", passed, min(_ratio(fs.spread**2 * (1 + 1e-9),
                                                 fs_quotient), growth / 100.0),
        f"subsampling quotient {fs_quotient:.12f} <= {fs.spread**2}; "
        f"sign-radial quotient grew {growth:.0f}x as scale shrank 100x")


# ---------------------------------------------------------------------------
# gradient estimator suite


def check_estimator_frozen_arithmetic(seed: int = DEFAULT_SEED) -> CheckResult:
    """Fresh batch size, path step count, and budget at pinned inputs."""
    params = make_rvr_params(epsilon=0.1, reset_prob=0.5, sigma1=1.0,
                             sigma2=1.0, l2=1.0)
    checks = [
        params.n_fresh == 500,
        params.path_steps(0.1) == 11,
        abs(expected_query_budget(params, 0.0) - 306.0) < 1e-12,
        abs(expected_query_budget(params, 0.1) - 319.2) < 1e-12,
        params.path_steps(0.0) == 0,
        make_rvr_params(epsilon=0.1, reset_prob=0.3, sigma1=0.0, sigma2=1.0,
                        l2=1.0).reset_prob == 1.0,
    ]
    passed = all(checks)
    return CheckResult("estimator_frozen_arithmetic", passed,
                       1.0 if passed else 0.0,
                       f"{sum(checks)}/{len(checks)} pinned values match")


def check_estimator_transport_exact(seed: int = DEFAULT_SEED) -> CheckResult:
    """Zero noise: forced transport reproduces the exact gradient."""
    rng = make_generator(derive_seed(seed, "q"))
    B = rng.standard_normal((4, 4))
    problem = QuadraticProblem(A=(B + B.T) / 2.0, b=rng.standard_normal(4),
                               l2=1.0, delta=5.0)
    oracle = StochasticOracle(problem, NoiseParams(), seed=seed)
    params = make_rvr_params(epsilon=0.1, reset_prob=1.0, sigma1=0.0,
                             sigma2=0.0, l2=1.0)
    coins = make_generator(derive_seed(seed, "coins"))
    x = problem.x0.copy()
    g, state = estimate(oracle, x, None, params, coins)
    worst = float(np.linalg.norm(g - problem.grad(x)))
    for _ in range(10):
        x = x - 0.3 * g
        g, state = estimate(oracle, x, state, params, coins, reset_prob=0.0)
        worst = max(worst, float(np.linalg.norm(g - problem.grad(x))))
    passed = worst < 1e-10
    return CheckResult("estimator_transport_exact", passed,
                       _ratio(1e-10, worst),
                       f"max exact-transport error {worst:.2e} over 10 moves")


def check_estimator_mse(seed: int = DEFAULT_SEED, steps: int = 150,
                        replications: int = 6) -> CheckResult:
    """Driven along its consumer trajectory, the estimator's MSE stays
    below 1.2 epsilon^2."""
    eps = 0.2
    problem = _offsets_instance(seed, 8)
    noise = NoiseParams(sigma1=0.5, sigma2=0.5)
    reg = problem.regularity
    eta = 1.0 / (2.0 * math.sqrt(reg.l1**2 + noise.sigma2**2 + eps * reg.l2))
    b = min(1.0, eta * eps * math.sqrt(noise.sigma2**2 + eps * reg.l2)
            / noise.sigma1)
    params = make_rvr_params(epsilon=eps, reset_prob=b, sigma1=noise.sigma1,
                             sigma2=noise.sigma2, l2=reg.l2)
    suite = estimator_error_suite(problem, noise, params, step_size=eta,
                                  steps=steps, replications=replications,
                                  seed=derive_seed(seed, "mse"))
    bound = 1.2 * eps**2
    passed = suite.mse <= bound
    return CheckResult("estimator_mse", passed, _ratio(bound, suite.mse),
                       f"MSE {suite.mse:.5f} <= {bound:.5f} over "
                       f"{replications}x{steps} steps (b={b:.4f})")


def check_estimator_budget(seed: int = DEFAULT_SEED) -> CheckResult:
    """Empirical per-call query cost is below the budget formula at pinned
    move lengths."""
    problem = _offsets_instance(seed, 6)
    noise = NoiseParams(sigma1=1.0, sigma2=1.0)
    params = make_rvr_params(epsilon=0.1, reset_prob=0.5, sigma1=1.0,
                             sigma2=1.0, l2=problem.regularity.l2)
    oracle = StochasticOracle(problem, noise, seed=derive_seed(seed, "o"))
    coins = make_generator(derive_seed(seed, "c"))
    rng = make_generator(derive_seed(seed, "dirs"))
    results = []
    ok = True
    for dx in (0.0, 0.05, 0.1):
        x_prev = problem.x0.copy()
        costs = []
        for _ in range(400):
            state = EstimatorState(x_prev=x_prev,
                                   g_prev=problem.grad(x_prev))
            u = rng.standard_normal(6)
            u /= np.linalg.norm(u)
            x = x_prev + dx * u
            before = oracle.ledger.total
            estimate(oracle, x, state, params, coins)
            costs.append(oracle.ledger.total - before)
        mean_cost = float(np.mean(costs))
        bound = expected_query_budget(params, dx)
        ok = ok and mean_cost <= bound
        results.append((dx, mean_cost, bound))
    margin = min(_ratio(b, c) for _, c, b in results)
    detail = "; ".join(f"dx={dx}: {c:.1f} <= {b:.1f}" for dx, c, b in results)
    return CheckResult("estimator_budget", ok, margin, detail)


# ---------------------------------------------------------------------------
# subproblem suite


def check_cubic_frozen_cases(seed: int = DEFAULT_SEED) -> CheckResult:
    """Closed-form solutions: golden-ratio interior step, pure eigenstep
    in the hard case, and the boundary clamp."""
    worst = 0.0
    # 1-d interior: (H + theta) s = -g with theta = M s / 2 gives
    # s^2 - s - 1 = 0, the golden ratio.
    step = solve_cubic_tr(CubicModel(g=np.array([-1.0]),
                                     H=np.array([[-1.0]]), M=2.0, radius=10.0))
    worst = max(worst, abs(step.s[0] - (1.0 + math.sqrt(5.0)) / 2.0))
    # hard case: g = 0, indefinite H; step is the bottom eigenvector scaled
    # to make the shifted system singularity-free: ||s|| = 2 lambda / M.
    step = solve_cubic_tr(CubicModel(g=np.zeros(2),
                                     H=np.diag([-1.0, 2.0]), M=3.0,
                                     radius=10.0))
    worst = max(worst, float(np.linalg.norm(step.s - np.array([2.0 / 3.0, 0.0]))))
    worst = max(worst, abs(model_value(CubicModel(g=np.zeros(2),
                                                  H=np.diag([-1.0, 2.0]),
                                                  M=3.0, radius=10.0),
                                       step.s) - (-2.0 / 27.0)))
    # boundary: the same model with a tight ball clamps to the radius.
    step = solve_cubic_tr(CubicModel(g=np.zeros(2), H=np.diag([-1.0, 2.0]),
                                     M=3.0, radius=0.5))
    worst = max(worst, abs(float(np.linalg.norm(step.s)) - 0.5))
    passed = worst < 1e-9
    return CheckResult("cubic_frozen_cases", passed, _ratio(1e-9, worst),
                       f"max closed-form deviation {worst:.2e}")


def _random_cubic_models(seed: int, count: int):
    rng = make_generator(derive_seed(seed, "models"))
    for i in range(count):
        d = int(rng.integers(2, 9))
        B = rng.standard_normal((d, d))
        H = (B + B.T) / 2.0
        g = rng.standard_normal(d) * 10.0 ** rng.uniform(-3.0, 1.0)
        mode = i % 5
        if mode == 1:
            g = np.zeros(d)  # pure eigen step
        elif mode == 2:
            evals, Q = np.linalg.eigh(H)
            g = g - Q[:, 0] * (Q[:, 0] @ g)  # hard case: g orthogonal to v1
        elif mode == 3:
            H = H + np.eye(d) * (abs(np.linalg.eigvalsh(H).min()) + 0.5)
        M = 10.0 ** rng.uniform(-1.0, 1.0)
        radius = 10.0 ** rng.uniform(-1.5 if mode == 4 else -1.0, 0.7)
        yield CubicModel(g=g, H=H, M=M, radius=radius)


def check_cubic_kkt(seed: int = DEFAULT_SEED, count: int = 300) -> CheckResult:
    """KKT residual of the ball-constrained cubic solver stays below 1e-8
    across a corpus that includes hard and boundary cases."""
    worst = 0.0
    for model in _random_cubic_models(seed, count):
        step = solve_cubic_tr(model)
        worst = max(worst, step.kkt_residual)
    passed = worst <= 1e-8
    return CheckResult("cubic_kkt", passed, _ratio(1e-8, worst),
                       f"max KKT residual {worst:.2e} over {count} models")


def check_cubic_brute(seed: int = DEFAULT_SEED, count: int = 40) -> CheckResult:
    """Solver value is never beaten by random search by more than 1e-6."""
    rng = make_generator(derive_seed(seed, "brute"))
    worst_gap = -np.inf
    for i in range(count):
        d = int(rng.integers(1, 4))
        B = rng.standard_normal((d, d))
        model = CubicModel(g=rng.standard_normal(d), H=(B + B.T) / 2.0,
                           M=float(10.0 ** rng.uniform(-0.5, 0.5)),
                           radius=float(10.0 ** rng.uniform(-0.5, 0.5)))
        found = solve_cubic_tr(model).value
        brute = brute_force_value(model, n_samples=20000,
                                  seed=derive_seed(seed, "bf", i))
        worst_gap = max(worst_gap, found - brute)
    passed = worst_gap <= 1e-6
    return CheckResult("cubic_brute", passed, _ratio(1e-6, max(worst_gap, 0.0)),
                       f"worst (solver - random search) gap {worst_gap:.2e} "
                       f"over {count} models")


def check_curvature_direction_contract(seed: int = DEFAULT_SEED) -> CheckResult:
    """Threshold inclusivity, unit step length, and sign symmetrization."""
    gamma = 0.25
    ok = True
    notes = []
    u = exact_curvature_direction(np.diag([-4.0 * gamma, 1.0]), gamma)
    ok = ok and u is not None and abs(np.linalg.norm(u) - 1.0) < 1e-12
    notes.append("boundary eigenvalue accepted" if u is not None
                 else "boundary eigenvalue rejected")
    ok = ok and exact_curvature_direction(
        np.diag([-4.0 * gamma + 1e-9, 1.0]), gamma) is None
    rng = make_generator(derive_seed(seed, "r"))
    x = np.zeros(2)
    steps = {tuple(np.round(curvature_step(x, np.array([1.0, 0.0]), gamma,
                                           2.0, rng), 12))
             for _ in range(64)}
    lengths_ok = all(abs(np.linalg.norm(np.array(s)) - gamma / 2.0) < 1e-12
                     for s in steps)
    ok = ok and lengths_ok and len(steps) == 2
    notes.append(f"step set size {len(steps)}, length gamma/l2: {lengths_ok}")
    return CheckResult("curvature_direction_contract", ok,
                       1.0 if ok else 0.0, "; ".join(notes))


def check_oja_search(seed: int = DEFAULT_SEED, seeds: int = 20) -> CheckResult:
    """Finds certified descent directions on an indefinite instance and
    certifies near-PSD-ness on a PSD one."""
    gamma = 0.2
    d = 20
    neg = QuadraticProblem(A=np.diag([-0.9] + [0.1] * (d - 1)),
                           b=np.zeros(d), l2=1.0, delta=10.0)
    psd = QuadraticProblem(A=0.5 * np.eye(d), b=np.zeros(d), l2=1.0)
    noise = NoiseParams(sigma2=0.5)
    x = np.zeros(d)
    found, certified, rayleigh_ok = 0, 0, True
    for s in range(seeds):
        o1 = StochasticOracle(neg, noise, seed=derive_seed(seed, "neg", s))
        out = oja_search(o1, x, gamma, delta=0.05,
                         rng=make_generator(derive_seed(seed, "rng", s)))
        if out.found:
            found += 1
            true_rayleigh = float(out.direction @ neg.hess(x) @ out.direction)
            rayleigh_ok = rayleigh_ok and true_rayleigh <= -gamma / 2.0
        o2 = StochasticOracle(psd, noise, seed=derive_seed(seed, "psd", s))
        out2 = oja_search(o2, x, gamma, delta=0.05,
                          rng=make_generator(derive_seed(seed, "rng2", s)))
        certified += int(not out2.found)
    passed = found >= 0.8 * seeds and certified >= 0.8 * seeds and rayleigh_ok
    margin = min(found / (0.8 * seeds), certified / (0.8 * seeds))
    return CheckResult("oja_search", passed, margin,
                       f"negative case found {found}/{seeds}; PSD certified "
                       f"{certified}/{seeds}; found directions genuinely "
                       f"negative: {rayleigh_ok}")


# ---------------------------------------------------------------------------
# solver suite


def check_param_fidelity(seed: int = DEFAULT_SEED) -> CheckResult:
    """Solver parameter arithmetic at pinned inputs, bit for bit."""
    reg = RegularityParams(delta=1.0, l1=1.0, l2=1.0)
    noise = NoiseParams(sigma1=1.0, sigma2=1.0)
    p2 = solvers.sgd_rvr_params(reg, noise, epsilon=0.01)
    p3 = solvers.cubic_rvr_params(reg, noise, epsilon=0.1, dim=10)
    reg4 = RegularityParams(delta=1.0, l1=math.sqrt(3.9), l2=1.0)
    p4 = solvers.sosp_hvp_params(reg4, NoiseParams(sigma1=1.0, sigma2=0.0),
                                 epsilon=0.1, gamma=0.5)
    p5 = solvers.sosp_cubic_params(reg, noise, epsilon=0.1, gamma=0.4, dim=10)
    checks = [
        p2["eta"] == 1.0 / (2.0 * math.sqrt(2.01)),
        p2["T"] == 56710,
        p2["b"] == min(1.0, p2["eta"] * 0.01 * math.sqrt(1.01)),
        p3["M"] == 5.0,
        p3["eta"] == 25.0 * math.sqrt(0.1 / 5.0),
        p3["T"] == 5,
        p3["n_H"] == 63322,
        p4["eta"] == 0.25,
        p4["p"] == 0.5**3 / (0.5**3 + 10.0 * 1.0 * 0.25 * 0.01),
        p5["M"] == 4.0,
        p5["p"] == (2.0 * 0.4**1.5) / (2.0 * 0.4**1.5 + 540.0 * 0.1**1.5),
    ]
    passed = all(checks)
    return CheckResult("param_fidelity", passed, 1.0 if passed else 0.0,
                       f"{sum(checks)}/{len(checks)} pinned parameter values "
                       "match exactly")


def check_descent_gradient(seed: int = DEFAULT_SEED,
                           probes: int = 1000) -> CheckResult:
    """F(x) - F(x - eta g) >= (eta/8)||grad F||^2 - (3 eta/4)||grad F - g||^2
    for every eta <= 1/(2 L1), no matter how wrong g is."""
    problem = _offsets_instance(seed, 6)
    l1 = problem.regularity.l1
    rng = make_generator(derive_seed(seed, "probes"))
    failures = 0
    min_slack = np.inf
    for _ in range(probes):
        x = rng.uniform(-2.0, 2.0, 6)
        gF = problem.grad(x)
        g = gF + rng.standard_normal(6) * 10.0 ** rng.uniform(-3.0, 0.5)
        eta = rng.uniform(0.05, 1.0) / (2.0 * l1)
        lhs = problem.value(x) - problem.value(x - eta * g)
        rhs = (eta / 8.0) * float(gF @ gF) \
            - (3.0 * eta / 4.0) * float((gF - g) @ (gF - g))
        slack = lhs - rhs
        min_slack = min(min_slack, slack)
        if slack < -1e-12:
            failures += 1
    passed = failures == 0
    return CheckResult("descent_gradient", passed,
                       1.0 if passed else 0.0,
                       f"{failures}/{probes} violations; min slack "
                       f"{min_slack:.3e}")


def check_descent_cubic(seed: int = DEFAULT_SEED,
                        probes: int = 1000) -> CheckResult:
    """The ball-constrained cubic step decreases F by (M/12)||s||^3 up to
    the g and H error terms, for any errors, whenever M >= 4 L2."""
    problem = _offsets_instance(seed, 4)
    l2 = problem.regularity.l2
    rng = make_generator(derive_seed(seed, "probes"))
    failures = 0
    min_slack = np.inf
    for _ in range(probes):
        x = rng.uniform(-1.5, 1.5, 4)
        gF, HF = problem.grad(x), problem.hess(x)
        g = gF + rng.standard_normal(4) * 10.0 ** rng.uniform(-3.0, 0.0)
        E = rng.standard_normal((4, 4))
        E = (E + E.T) / 2.0
        E *= 10.0 ** rng.uniform(-3.0, 0.0) / max(1e-12,
                                                  np.linalg.norm(E, ord=2))
        H = HF + E
        M = l2 * rng.uniform(4.0, 10.0)
        eta = 10.0 ** rng.uniform(-1.5, 0.0)
        s = solve_cubic_tr(CubicModel(g=g, H=H, M=M, radius=eta)).s
        lhs = problem.value(x) - problem.value(x + s)
        chi = float(np.linalg.norm(gF - g))
        zeta = float(np.linalg.norm(HF - H, ord=2))
        rhs = (M / 12.0) * float(np.linalg.norm(s))**3 \
            - (8.0 / math.sqrt(M)) * chi**1.5 \
            - (4.0 / math.sqrt(M)) * (eta * zeta)**1.5
        slack = lhs - rhs
        min_slack = min(min_slack, slack)
        if slack < -1e-10:
            failures += 1
    passed = failures == 0
    return CheckResult("descent_cubic", passed, 1.0 if passed else 0.0,
                       f"{failures}/{probes} violations; min slack "
                       f"{min_slack:.3e}")


def check_descent_curvature(seed: int = DEFAULT_SEED,
                            probes: int = 500) -> CheckResult:
    """Sign-averaged curvature steps decrease F by 5 gamma^3/(6 L2^2) minus
    the Hessian error term whenever the surrogate sees lambda_min <= -4 gamma."""
    problem = _offsets_instance(seed, 6)
    l2 = problem.regularity.l2
    rng = make_generator(derive_seed(seed, "probes"))
    applicable = 0
    failures = 0
    min_slack = np.inf
    for _ in range(probes):
        # Curvature is most negative where the shifted coordinates sit near
        # zero, so bias half the samples there to make the branch fire.
        x = rng.uniform(-2.0, 2.0, 6) if rng.random() < 0.5 \
            else rng.normal(0.0, 0.3, 6)
        x = x - problem.offsets
        HF = problem.hess(x)
        E = rng.standard_normal((6, 6))
        E = (E + E.T) / 2.0
        E *= 10.0 ** rng.uniform(-3.0, -0.5) / np.linalg.norm(E, ord=2)
        H = HF + E
        gamma = rng.uniform(0.05, 0.3) * problem.scale * 8.0
        if np.linalg.eigvalsh(H)[0] > -4.0 * gamma:
            continue
        applicable += 1
        u = exact_curvature_direction(H, gamma)
        step = (gamma / l2) * u
        mean_val = 0.5 * (problem.value(x + step) + problem.value(x - step))
        zeta = float(np.linalg.norm(HF - H, ord=2))
        rhs = problem.value(x) - (5.0 * gamma**3) / (6.0 * l2**2) \
            + (gamma**2 / (2.0 * l2**2)) * zeta
        slack = rhs - mean_val
        min_slack = min(min_slack, slack)
        if slack < -1e-12:
            failures += 1
    passed = failures == 0 and applicable >= probes // 10
    return CheckResult("descent_curvature", passed, 1.0 if passed else 0.0,
                       f"{failures}/{applicable} violations (branch fired "
                       f"{applicable}/{probes}); min slack {min_slack:.3e}")


def check_telescoped_descent(seed: int = DEFAULT_SEED) -> CheckResult:
    """Zero noise: mean squared gradient along the run telescopes to
    8 Delta / (eta T)."""
    problem = _offsets_instance(seed, 4, scale=0.25)
    result = solvers.sgd_hvp_rvr(problem, NoiseParams(), epsilon=0.3,
                                 seed=derive_seed(seed, "run"),
                                 keep_iterates=True)
    iterates = result.iterates[:-1]  # x^1 .. x^T; the trailing point is x^{T+1}
    grads = problem.grad_many(iterates)
    mean_sq = float((grads**2).sum(axis=1).mean())
    bound = 8.0 * problem.regularity.delta / (result.params["eta"]
                                              * result.params["T"])
    passed = mean_sq <= bound
    return CheckResult("telescoped_descent", passed, _ratio(bound, mean_sq),
                       f"mean ||grad||^2 {mean_sq:.4f} <= "
                       f"8 Delta/(eta T) = {bound:.4f} "
                       f"(T={result.params['T']})")


def check_ledger_budget(seed: int = DEFAULT_SEED) -> CheckResult:
    """Realized query totals stay within 2x the per-step budget formula
    summed along the realized trajectory."""
    problem = _offsets_instance(seed, 5)
    noise = NoiseParams(sigma1=0.7, sigma2=0.7)
    eps = 0.25
    result = solvers.sgd_hvp_rvr(problem, noise, epsilon=eps,
                                 seed=derive_seed(seed, "run"),
                                 overrides={"T": 300}, keep_iterates=True)
    params = make_rvr_params(epsilon=eps, reset_prob=result.params["b"],
                             sigma1=noise.sigma1, sigma2=noise.sigma2,
                             l2=problem.regularity.l2)
    # Moves consumed by the estimator: step t >= 2 transports across
    # x^t - x^{t-1}; the final recorded move is never consumed.
    steps = np.linalg.norm(np.diff(result.iterates, axis=0), axis=1)[:-1]
    predicted = params.n_fresh + sum(expected_query_budget(params, float(dx))
                                     for dx in steps)
    total = result.ledger.total
    passed = total <= 2.0 * predicted
    return CheckResult("ledger_budget", passed, _ratio(2.0 * predicted, total),
                       f"ledger total {total} <= 2 x predicted "
                       f"{predicted:.0f} over T=300 tuned steps")


def check_output_uniformity(seed: int = DEFAULT_SEED,
                            runs: int = 400) -> CheckResult:
    """The returned iterate index is uniform over the advertised range."""
    problem = _offsets_instance(seed, 3)
    horizon = 8
    counts = np.zeros(horizon)
    for r in range(runs):
        res = solvers.sgd_baseline(problem, NoiseParams(), epsilon=1e-9,
                                   step_size=1.0 / (2 * problem.regularity.l1),
                                   horizon=horizon,
                                   seed=derive_seed(seed, "u", r))
        counts[res.output_index] += 1
    p_value = float(stats.chisquare(counts).pvalue)
    passed = p_value >= 1e-3
    return CheckResult("output_uniformity", passed, _ratio(p_value, 1e-3),
                       f"chi-square p={p_value:.4f} over {runs} runs, "
                       f"{horizon} slots")


# ---------------------------------------------------------------------------
# hard instance suite


def check_chain_components(seed: int = DEFAULT_SEED) -> CheckResult:
    """Pinned values and ranges of the three scalar building blocks."""
    worst = 0.0
    worst = max(worst, abs(psi(0.5)), abs(psi(0.75) - math.exp(-3.0)))
    worst = max(worst, abs(psi(1.0, 1) - 4.0 * math.exp(0.0) * psi(1.0)))
    worst = max(worst, abs(phi(0.0) - 2.066365677061247))
    worst = max(worst, abs(phi(0.0, 1) - math.sqrt(math.e)))
    worst = max(worst, abs(lambda_fn(0.0, 2) + 8.0), abs(lambda_fn(0.0)))
    xs = np.linspace(-6.0, 6.0, 4001)
    worst_range = 0.0
    if float(np.max(np.abs(lambda_fn(xs)))) > 8.0:
        worst_range = 1.0
    if float(np.max(psi(xs))) > math.e + 1e-12:
        worst_range = 1.0
    cases = [
        prog(np.zeros(5)) == 0,
        prog(np.array([0.3, 0.2, 0.0]), 0.25) == 1,
        prog(np.array([1.0, 1.0, 0.2]), 0.25) == 2,
        prog(np.array([0.1, 0.1]), 0.25) == 0,
        prog(np.array([0.0, 0.3]), 0.25) == 2,
    ]
    passed = worst < 1e-12 and worst_range == 0.0 and all(cases)
    return CheckResult("chain_components", passed, _ratio(1e-12, worst),
                       f"max pinned-value deviation {worst:.2e}; "
                       f"{sum(cases)}/5 progress cases")


def check_chain_derivatives(seed: int = DEFAULT_SEED) -> CheckResult:
    """Closed-form chain gradient/Hessian match finite differences and
    keep the tridiagonal sparsity exactly."""
    rng = make_generator(derive_seed(seed, "fd"))
    worst = 0.0
    sparsity_ok = True
    for kind in ("eps", "gamma"):
        chain = ChainFunction(kind=kind, length=6, alpha=2.0, beta=0.5)
        for _ in range(10):
            x = rng.uniform(-2.0, 2.0, 6)
            _, g, H = chain_eval(chain, x)
            h = 1e-6
            for i in range(6):
                e = np.zeros(6)
                e[i] = h
                fd = (chain.value(x + e) - chain.value(x - e)) / (2.0 * h)
                worst = max(worst, abs(fd - g[i]) / max(1.0, abs(g[i])))
            dense = H.to_dense()
            off2 = np.triu(np.abs(dense), k=2)
            sparsity_ok = sparsity_ok and float(off2.max()) == 0.0
    passed = worst < 1e-6 and sparsity_ok
    return CheckResult("chain_derivatives", passed, _ratio(1e-6, worst),
                       f"max FD relative error {worst:.2e}; bands beyond "
                       f"the first exactly zero: {sparsity_ok}")


def check_zero_chain_moments(seed: int = DEFAULT_SEED,
                             draws: int = 15000) -> CheckResult:
    """Resisting oracle: unbiased, exact tail variance, support confined
    to one slice past current progress, and an exact gamma-kind gradient."""
    chain = ChainFunction(kind="eps", length=5, alpha=1.0, beta=1.0)
    rho = 0.3
    x = np.array([1.0, 0.9, 0.2, 0.0, 0.0])
    j = prog(x, 0.25)
    g_exact = chain.grad(x)
    oracle = ZeroChainOracle(chain, rho, seed=derive_seed(seed, "zc"))
    sample = np.array([oracle.query(x, 1) for _ in range(draws)])
    bias = float(np.abs(sample.mean(axis=0) - g_exact).max())
    bias_band = 4.0 * float(np.abs(g_exact[j:]).max()) \
        * math.sqrt((1 - rho) / rho) / math.sqrt(draws) + 1e-12
    tail = g_exact[j:]
    pred_var = float(tail @ tail) * (1.0 - rho) / rho
    emp_var = float(sample.var(axis=0).sum())
    var_ok = abs(emp_var - pred_var) <= 0.1 * pred_var
    support_ok = all(max(slice_support(row) | {0}) <= j + 1 for row in sample)

    gchain = ChainFunction(kind="gamma", length=5, alpha=1.0, beta=1.0)
    goracle = ZeroChainOracle(gchain, 0.5, seed=derive_seed(seed, "g"))
    xg = np.array([1.0, 0.8, 0.0, 0.0, 0.0])
    exact_grad_ok = all(
        np.array_equal(goracle.query(xg, 1), gchain.grad(xg))
        for _ in range(50))
    passed = bias <= bias_band and var_ok and support_ok and exact_grad_ok
    margin = min(_ratio(bias_band, bias),
                 _ratio(0.1 * pred_var, abs(emp_var - pred_var)))
    return CheckResult(
        "zero_chain_moments", passed, margin,
        f"bias {bias:.4f} (band {bias_band:.4f}); variance {emp_var:.3f} vs "
        f"{pred_var:.3f}; support confined: {support_ok}; gamma gradient "
        f"exact: {exact_grad_ok}")


def check_runner_laws(seed: int = DEFAULT_SEED) -> CheckResult:
    """rho=1 finishes in exactly T rounds; smaller rho follows the
    geometric law T/rho on average; the progress deadline is pinned."""
    chain = ChainFunction(kind="eps", length=8, alpha=1.0, beta=1.0)
    trace = zero_respecting_run(ZeroChainOracle(chain, 1.0, seed=1), 100)
    exact_ok = (trace.rounds == 8 and trace.completed
                and trace.events == [(0, 0)] + [(t, t) for t in range(1, 9)])
    T, rho, runs = 12, 0.3, 300
    chain2 = ChainFunction(kind="eps", length=T, alpha=1.0, beta=1.0)
    rounds = np.array([
        zero_respecting_run(ZeroChainOracle(chain2, rho,
                                            derive_seed(seed, "runs", r)),
                            10000).rounds
        for r in range(runs)])
    mean_expected = T / rho
    se = math.sqrt(T * (1 - rho)) / rho / math.sqrt(runs)
    mean_ok = abs(rounds.mean() - mean_expected) <= 4.0 * se
    pinned = progress_bound(20, 0.01, 0.1)
    pin_ok = pinned == 884.8707453502976
    passed = exact_ok and mean_ok and pin_ok
    return CheckResult(
        "runner_laws", passed,
        _ratio(4.0 * se, abs(rounds.mean() - mean_expected)),
        f"rho=1 exact: {exact_ok}; mean rounds {rounds.mean():.1f} vs "
        f"{mean_expected:.1f} (4se={4*se:.1f}); deadline pinned: {pin_ok}")


def check_recipe_audits(seed: int = DEFAULT_SEED) -> CheckResult:
    """Both scaling recipes produce in-class instances that pass every
    structural audit."""
    eps_bundle = build_eps_hard_instance(eps=0.1, l1=1.0, l2=1.0,
                                         sigma1=10.0, sigma2=1.0, delta=1000.0)
    gamma_bundle = build_gamma_hard_instance(gamma=0.05, l2=100.0,
                                             sigma2=200.0, delta=5000.0)
    worst = _BIG
    ok = True
    notes = []
    for bundle in (eps_bundle, gamma_bundle):
        audits = audit_hard_instance(bundle, n_probes=120,
                                     seed=derive_seed(seed, "audit",
                                                      bundle.chain.kind))
        for a in audits:
            ok = ok and a.passed
            if a.margin > 0:  # exact audits report 0 headroom by convention
                worst = min(worst, a.margin)
            if not a.passed:
                notes.append(f"{bundle.chain.kind}:{a.name} FAILED ({a.detail})")
        notes.append(f"{bundle.chain.kind}: T={bundle.chain.length}, "
                     f"rho={bundle.rho:.4f}, bound="
                     f"{bundle.query_lower_bound:.1f}")
    return CheckResult("recipe_audits", ok, worst, "; ".join(notes))


# ---------------------------------------------------------------------------
# suite registry


SUITES: dict[str, list] = {
    "core": [
        check_noise_draw_norms,
        check_unbiased_moments,
        check_shared_draw_coupling,
        check_hvp_path_telescope,
        check_matrix_concentration,
        check_mss_counterexample,
    ],
    "hvp_rvr": [
        check_estimator_frozen_arithmetic,
        check_estimator_transport_exact,
        check_estimator_mse,
        check_estimator_budget,
    ],
    "subproblems": [
        check_cubic_frozen_cases,
        check_cubic_kkt,
        check_cubic_brute,
        check_curvature_direction_contract,
        check_oja_search,
    ],
    "solvers": [
        check_param_fidelity,
        check_descent_gradient,
        check_descent_cubic,
        check_descent_curvature,
        check_telescoped_descent,
        check_ledger_budget,
        check_output_uniformity,
    ],
    "hard_instances": [
        check_chain_components,
        check_chain_derivatives,
        check_zero_chain_moments,
        check_runner_laws,
        check_recipe_audits,
    ],
}

SUITE_NAMES = tuple(SUITES)


def run_suite(name: str, seed: int = DEFAULT_SEED) -> list[CheckResult]:
    if name not in SUITES:
        raise ConfigError(f"unknown suite {name!r}; "
                          f"expected one of {list(SUITES)} or 'all'")
    return [check(seed=seed) for check in SUITES[name]]


def run_verify(names: list[str], seed: int = DEFAULT_SEED) -> dict:
    """Run the named suites ('all' expands to every suite); returns a
    JSON-ready report with per-check margins."""
    expanded: list[str] = []
    for name in names:
        if name == "all":
            expanded.extend(SUITES)
        else:
            expanded.append(name)
    report: dict = {"seed": seed, "suites": {}, "passed": True}
    for name in expanded:
        results = run_suite(name, seed=seed)
        report["suites"][name] = {
            "checks": [r.to_dict() for r in results],
            "passed": all(r.passed for r in results),
        }
        report["passed"] = report["passed"] and report["suites"][name]["passed"]
    return report
