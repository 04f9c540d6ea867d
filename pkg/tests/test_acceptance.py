"""Acceptance gate: one test per headline claim, at desk scale.

Each test prints a single PASS/FAIL line with the measured quantity next
to its tolerance, so a transcript of this file doubles as the acceptance
report.  Seeds are fixed; every run reproduces the same numbers.
"""

import math
import time

import numpy as np
import pytest

import sosplab.harness.config as hc
import sosplab.harness.lowerbound as lowerbound
import sosplab.harness.sweep as sweep
import sosplab.hvp_rvr as hv
from sosplab import solvers
from sosplab._rng import derive_seed, make_generator
from sosplab.core.oracle import NoiseParams, StochasticOracle
from sosplab.core.problems import (LambdaSumProblem, QuadraticProblem,
                                   RegularityParams)
from sosplab.harness import verify
from sosplab.hard_instances import (ChainFunction, ChainProblem,
                                    build_eps_hard_instance,
                                    build_gamma_hard_instance,
                                    audit_hard_instance)
from sosplab.subproblems.cubic import CubicModel, brute_force_value, solve_cubic_tr
from sosplab.subproblems.curvature import oja_search


def report(name: str, ok: bool, detail: str) -> None:
    print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"{name}: {detail}"


# ---------------------------------------------------------------------------
# 1. recursive HVP estimator keeps its mean squared error at the target


def test_c01_estimator_error():
    eps = 0.1
    problem = LambdaSumProblem(dim=20)
    noise = NoiseParams(sigma1=1.0, sigma2=1.0)
    sched = solvers.sgd_rvr_params(problem.regularity, noise, eps)
    params = hv.make_rvr_params(
        epsilon=eps, reset_prob=sched["b"], sigma1=1.0, sigma2=1.0,
        l2=problem.regularity.l2)
    suite = hv.estimator_error_suite(
        problem, noise, params, step_size=sched["eta"],
        steps=2000, replications=50, seed=11)
    tol = 1.2 * eps**2
    report("estimator_error", suite.mse <= tol,
           f"mse {suite.mse:.6f} <= {tol:.6f} over {suite.steps} steps x "
           f"{suite.replications} reps")


# ---------------------------------------------------------------------------
# 2. estimator query count stays under the closed-form budget


def test_c02_estimator_query_budget():
    problem = LambdaSumProblem(dim=8)
    noise = NoiseParams(sigma1=1.0, sigma2=1.0)
    details = []
    ok = True
    for eps, b, dx in ((0.1, 0.5, 0.1), (0.2, 0.25, 0.0), (0.05, 1.0, 0.02)):
        params = hv.make_rvr_params(
            epsilon=eps, reset_prob=b, sigma1=1.0, sigma2=1.0,
            l2=problem.regularity.l2)
        oracle = StochasticOracle(problem, noise, seed=derive_seed(5, "o", eps))
        rng = make_generator(derive_seed(5, "rng", eps))
        x = problem.x0.copy()
        state = None
        counts = []
        for _ in range(300):
            before = oracle.ledger.total
            _, state = hv.estimate(oracle, x, state, params, rng)
            counts.append(oracle.ledger.total - before)
            if dx > 0.0:
                u = rng.standard_normal(8)
                x = x + u / np.linalg.norm(u) * dx
        mean = float(np.mean(counts))
        budget = hv.expected_query_budget(params, dx)
        ok = ok and mean <= budget
        details.append(f"(eps={eps},b={b},dx={dx}): {mean:.1f}<={budget:.1f}")
    report("estimator_query_budget", ok, "; ".join(details))


# ---------------------------------------------------------------------------
# 3. query-vs-accuracy elbow: slope -4 for SGD, -3 for the HVP-RVR solver


SWEEP_FAMILY = {
    "problem": "lambda_sum", "dim": 2, "scale": 0.125,
    "offsets": [0.15, -0.35], "x0": [0.6, -0.7],
    "sigma1": 1.0, "sigma2": 1.0,
    "epsilon_grid": [0.2, 0.1, 0.05, 0.025],
    "replications": 20, "seed": 20260814, "fit_metric": "total",
}


def test_c03_elbow_slopes():
    cfg = hc.validate_config("sweep", {**SWEEP_FAMILY, "algorithm": "sgd"})
    sgd_fit = sweep.run_sweep(cfg).summary()["fit"]
    cfg = hc.validate_config("sweep", {**SWEEP_FAMILY, "algorithm": "sgd_hvp_rvr"})
    rvr_fit = sweep.run_sweep(cfg).summary()["fit"]
    ok = (abs(sgd_fit["slope"] + 4.0) <= 0.4 and sgd_fit["r_squared"] >= 0.9
          and abs(rvr_fit["slope"] + 3.0) <= 0.4 and rvr_fit["r_squared"] >= 0.9)
    report("elbow_slopes", ok,
           f"sgd slope {sgd_fit['slope']:.3f} (target -4+-0.4, "
           f"r2 {sgd_fit['r_squared']:.4f}); hvp-rvr slope "
           f"{rvr_fit['slope']:.3f} (target -3+-0.4, r2 {rvr_fit['r_squared']:.4f})")


# ---------------------------------------------------------------------------
# 4. descent lemmas hold on every probe


def test_c04_descent_lemmas():
    grad = verify.check_descent_gradient(seed=verify.DEFAULT_SEED, probes=1000)
    cubic = verify.check_descent_cubic(seed=verify.DEFAULT_SEED, probes=1000)
    report("descent_lemmas", grad.passed and cubic.passed,
           f"gradient: {grad.detail}; cubic: {cubic.detail}")


# ---------------------------------------------------------------------------
# 5. averaged noisy Hessians concentrate in operator norm


def test_c05_matrix_concentration():
    details = []
    ok = True
    for d, n, sigma in ((10, 100, 1.0), (50, 200, 0.5)):
        rng = np.random.default_rng(d)
        A = rng.standard_normal((d, d))
        A = (A + A.T) / 2.0 / math.sqrt(d)
        problem = QuadraticProblem(A=A, x0=np.zeros(d), delta=100.0)
        oracle = StochasticOracle(problem, NoiseParams(sigma2=sigma),
                                  seed=derive_seed(99, "mc", d))
        x = np.zeros(d)
        H = problem.hess(x)
        errs = np.empty(500)
        for r in range(500):
            errs[r] = np.linalg.norm(oracle.hess_mean(x, n) - H, ord=2) ** 2
        measured = float(errs.mean())
        bound = 22.0 * sigma**2 * math.log(d) / n
        ok = ok and measured <= bound
        details.append(f"(d={d},n={n},sigma={sigma}): {measured:.5f}<={bound:.4f}")
    report("matrix_concentration", ok, "; ".join(details))


# ---------------------------------------------------------------------------
# 6. ball-constrained cubic solver: KKT residuals and global optimality


def _random_cubic(rng):
    d = int(rng.integers(1, 4))
    H = rng.standard_normal((d, d))
    H = (H + H.T) / 2.0
    mode = int(rng.integers(0, 3))
    if mode == 0:
        g = np.zeros(d)  # pure hard case: solution driven by curvature alone
    elif mode == 1 and d > 1:
        w, V = np.linalg.eigh(H)
        g = rng.standard_normal(d)
        g -= (g @ V[:, 0]) * V[:, 0]  # g orthogonal to the bottom eigenvector
    else:
        g = rng.standard_normal(d)
    M = float(rng.uniform(0.5, 5.0))
    radius = float(rng.uniform(0.3, 2.0)) if rng.random() < 0.5 else np.inf
    return CubicModel(g=g, H=H, M=M, radius=radius)


def test_c06_cubic_subproblem():
    rng = np.random.default_rng(20260814)
    models = [_random_cubic(rng) for _ in range(1000)]
    worst_kkt = max(solve_cubic_tr(m).kkt_residual for m in models)
    worst_gap = -np.inf
    for m in models[:40]:
        if not np.isfinite(m.radius):
            m = CubicModel(g=m.g, H=m.H, M=m.M, radius=1.5)
        step = solve_cubic_tr(m)
        bf = brute_force_value(m, n_samples=100000, seed=7)
        worst_gap = max(worst_gap, step.value - bf)
    ok = worst_kkt <= 1e-8 and worst_gap <= 1e-6
    report("cubic_subproblem", ok,
           f"worst KKT residual {worst_kkt:.2e} <= 1e-8 over 1000 models; "
           f"worst (solver - brute) gap {worst_gap:.2e} <= 1e-6")


# ---------------------------------------------------------------------------
# 7. streaming negative-curvature search keeps its certificate rates


def test_c07_oja_certificates():
    d, gamma = 20, 0.2
    neg = QuadraticProblem(A=np.diag([-0.9] + [0.1] * (d - 1)),
                           b=np.zeros(d), l2=1.0, delta=10.0)
    psd = QuadraticProblem(A=0.5 * np.eye(d), b=np.zeros(d), l2=1.0)
    noise = NoiseParams(sigma2=0.5)
    x = np.zeros(d)
    correct = 0
    for s in range(100):
        oracle = StochasticOracle(neg, noise, seed=derive_seed(31, "neg", s))
        out = oja_search(oracle, x, gamma, delta=0.05,
                         rng=make_generator(derive_seed(31, "rng", s)))
        if out.found and float(out.direction @ neg.hess(x) @ out.direction) <= -gamma / 2.0:
            correct += 1
    certified = 0
    for s in range(100):
        oracle = StochasticOracle(psd, noise, seed=derive_seed(31, "psd", s))
        out = oja_search(oracle, x, gamma, delta=0.05,
                         rng=make_generator(derive_seed(31, "rng2", s)))
        certified += int(not out.found)
    ok = correct >= 90 and certified >= 90
    report("oja_certificates", ok,
           f"{correct}/100 true descent directions (need >=90); "
           f"{certified}/100 clean PSD certificates (need >=90)")


# ---------------------------------------------------------------------------
# 8. the two second-order solvers leave a saddle and return an approximate
#    second-order point on a chain with an exact saddle at the start


def _saddle_chain():
    return ChainProblem(
        ChainFunction("gamma", 4, alpha=1.0, beta=1.0),
        regularity=RegularityParams(l1=16.0, l2=10.0, delta=160.0))


def test_c08_sosp_output_quality():
    problem = _saddle_chain()
    noise = NoiseParams(sigma1=0.5, sigma2=0.5)
    eps, gamma = 0.3, 1.6
    lam_floor = -4.0 * gamma

    hvp_wins = 0
    for s in range(40):
        res = solvers.sosp_hvp(problem, noise, eps, gamma=gamma, seed=1000 + s,
                               overrides={"T": 300, "p": 0.7, "oja_delta": 0.05})
        if res.grad_norm_exact <= 8.0 * eps and res.lambda_min_exact >= lam_floor:
            hvp_wins += 1
    cubic_wins = 0
    for s in range(40):
        res = solvers.sosp_cubic(problem, noise, eps, gamma=gamma, seed=2000 + s,
                                 overrides={"T": 200, "n1": 100, "n2": 200,
                                            "p": 0.5, "eta": 0.2})
        if res.grad_norm_exact <= 450.0 * eps and res.lambda_min_exact >= lam_floor:
            cubic_wins += 1
    ok = hvp_wins >= 20 and cubic_wins >= 20
    report("sosp_output_quality", ok,
           f"hvp variant {hvp_wins}/40 runs at second-order target (need >=20); "
           f"cubic variant {cubic_wins}/40 (need >=20)")


# ---------------------------------------------------------------------------
# 9. the resisting instances satisfy every structural requirement


def test_c09_hard_instance_structure():
    eps_bundle = build_eps_hard_instance(
        eps=0.1, l1=1.0, l2=1.0, sigma1=10.0, sigma2=1.0, delta=1000.0)
    gamma_bundle = build_gamma_hard_instance(
        gamma=0.05, l2=100.0, sigma2=200.0, delta=5000.0)
    failures = []
    for label, bundle in (("eps", eps_bundle), ("gamma", gamma_bundle)):
        for check in audit_hard_instance(bundle, n_probes=200, seed=0):
            if not check.passed:
                failures.append(f"{label}:{check.name}")
    ok = not failures and eps_bundle.regime_ok and gamma_bundle.regime_ok
    report("hard_instance_structure", ok,
           "all structural audits passed on both recipes" if ok
           else f"failed audits: {failures}")


# ---------------------------------------------------------------------------
# 10. zero-respecting runs cannot beat the progress deadline


def test_c10_progress_lower_bound():
    cfg = hc.validate_config("lowerbound", {
        "kind": "eps", "chain_length": 20, "rho": 0.01,
        "fail_prob": 0.1, "replications": 500, "seed": 17})
    out = lowerbound.run_lowerbound(cfg)
    s = out.summary
    early = s["finished_by_deadline_fraction"]
    median = s["median_rounds_completed"]
    floor = 0.8 * (20 - 1) / (2 * 0.01)
    ok = early <= 0.2 and median is not None and median >= floor
    report("progress_lower_bound", ok,
           f"deadline-beating fraction {early:.3f} <= 0.2; median rounds "
           f"{median} >= {floor:.0f}")
