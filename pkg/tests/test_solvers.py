import numpy as np
import pytest

from sosplab import solvers as sv
from sosplab.core.oracle import NoiseParams
from sosplab.core.problems import LambdaSumProblem, QuadraticProblem, RegularityParams
from sosplab.errors import BudgetExceeded, ConfigError

REG = RegularityParams(l1=1.0, l2=1.0, delta=1.0)
NOISE = NoiseParams(sigma1=1.0, sigma2=1.0)


def quad3():
    return QuadraticProblem(A=np.eye(3), x0=np.ones(3))


# ---------------------------------------------------------------------------
# parameter rules, frozen at one reference point so a refactor can't silently
# change the schedules


def test_sgd_rvr_parameter_rules():
    p = sv.sgd_rvr_params(REG, NOISE, 0.1)
    assert p["eta"] == pytest.approx(0.34503277967117707, rel=1e-12)
    assert p["T"] == 580
    assert p["b"] == pytest.approx(0.0361873432227873, rel=1e-12)
    # horizon scales like eps^-2 once the step size saturates
    assert sv.sgd_rvr_params(REG, NOISE, 0.01)["T"] == 56710


def test_cubic_rvr_parameter_rules():
    p = sv.cubic_rvr_params(REG, NOISE, 0.1, dim=10)
    assert p["M"] == pytest.approx(5.0)
    assert p["eta"] == pytest.approx(3.5355339059327378, rel=1e-12)
    assert p["T"] == 5
    assert p["n_H"] == 63322
    assert p["b"] == pytest.approx(0.14832396974191328, rel=1e-12)


def test_sosp_hvp_parameter_rules():
    p = sv.sosp_hvp_params(REG, NOISE, 0.1, 0.4)
    assert p["eta"] == pytest.approx(0.34503277967117707, rel=1e-12)
    assert p["T"] == 893
    assert p["p"] == pytest.approx(0.6497245708042775, rel=1e-12)
    assert p["b_g"] == pytest.approx(0.0361873432227873, rel=1e-12)
    assert p["b_H"] == pytest.approx(0.4195235392680607, rel=1e-12)
    assert p["oja_delta"] == pytest.approx(0.00025, rel=1e-12)


def test_sosp_cubic_parameter_rules():
    p = sv.sosp_cubic_params(REG, NOISE, 0.1, 0.4, dim=10)
    assert p["M"] == pytest.approx(4.0)
    assert p["eta"] == pytest.approx(4.743416490252569, rel=1e-12)
    assert p["T"] == 284
    assert p["p"] == pytest.approx(0.028776978417266185, rel=1e-12)
    assert p["n1"] == 115130
    assert p["n2"] == 6333
    assert p["b_g"] == pytest.approx(0.16583123951777, rel=1e-12)
    assert p["b_H"] == pytest.approx(0.4195235392680607, rel=1e-12)


def test_batch_fractions_shrink_with_eps():
    # smaller targets need smaller per-query batch fractions, never > 1
    for eps in (0.5, 0.1, 0.02):
        p = sv.sgd_rvr_params(REG, NOISE, eps)
        assert 0.0 < p["b"] <= 1.0
    b_vals = [sv.sgd_rvr_params(REG, NOISE, e)["b"] for e in (0.5, 0.1, 0.02)]
    assert b_vals[0] > b_vals[1] > b_vals[2]


# ---------------------------------------------------------------------------
# overrides and refusal


def test_apply_overrides():
    base = {"T": 5, "eta": 0.3}
    params, mode = sv.apply_overrides(base, None)
    assert mode == "theory" and params == base
    params, mode = sv.apply_overrides(base, {"T": 9})
    assert mode == "tuned" and params["T"] == 9 and params["eta"] == 0.3
    with pytest.raises(ConfigError):
        sv.apply_overrides(base, {"bogus": 1})


def test_budget_refusal_reports_requirement():
    with pytest.raises(BudgetExceeded) as info:
        sv.sgd_hvp_rvr(quad3(), NOISE, 0.05, seed=1, budget_cap=10)
    assert info.value.required > 10


# ---------------------------------------------------------------------------
# runs


def test_noiseless_rvr_reaches_target():
    quiet = NoiseParams(sigma1=0.0, sigma2=0.0)
    res = sv.sgd_hvp_rvr(quad3(), quiet, 0.05, seed=2, overrides={"T": 60})
    assert res.grad_norm_exact <= 0.05
    assert res.mode == "tuned"
    assert 1 <= res.output_index <= 60


def test_same_seed_same_run():
    a = sv.sgd_hvp_rvr(quad3(), NOISE, 0.05, seed=7, overrides={"T": 30})
    b = sv.sgd_hvp_rvr(quad3(), NOISE, 0.05, seed=7, overrides={"T": 30})
    assert np.array_equal(a.output_x, b.output_x)
    assert a.output_index == b.output_index
    assert a.ledger.as_dict() == b.ledger.as_dict()
    c = sv.sgd_hvp_rvr(quad3(), NOISE, 0.05, seed=8, overrides={"T": 30})
    assert not np.array_equal(a.output_x, c.output_x)


@pytest.mark.parametrize(
    "name, kwargs",
    [
        ("sgd_hvp_rvr", {"overrides": {"T": 40}}),
        ("cubic_rvr", {"overrides": {"T": 4, "n_H": 30}}),
        ("sosp_hvp", {"gamma": 0.5, "overrides": {"T": 40, "oja_delta": 0.2}}),
        ("sosp_cubic", {"gamma": 0.5, "overrides": {"T": 6, "n1": 30, "n2": 30}}),
    ],
)
def test_run_result_contract(name, kwargs):
    rng = np.random.default_rng(42)
    prob = LambdaSumProblem(
        dim=4,
        offsets=rng.uniform(-0.5, 0.5, 4),
        scale=0.5,
        x0=rng.uniform(-0.8, 0.8, 4),
    )
    res = getattr(sv, name)(prob, NoiseParams(sigma1=0.5, sigma2=0.5), 0.2, seed=5, **kwargs)
    assert res.algorithm == name
    assert res.output_x.shape == (4,)
    assert np.isfinite(res.grad_norm_exact)
    assert res.ledger.total > 0
    if name.startswith("sosp"):
        assert res.gamma == 0.5
        assert np.isfinite(res.lambda_min_exact)
    else:
        assert res.gamma is None


def test_second_order_solvers_charge_the_right_channels():
    rng = np.random.default_rng(42)
    prob = LambdaSumProblem(
        dim=4,
        offsets=rng.uniform(-0.5, 0.5, 4),
        scale=0.5,
        x0=rng.uniform(-0.8, 0.8, 4),
    )
    noise = NoiseParams(sigma1=0.5, sigma2=0.5)
    rvr = sv.sgd_hvp_rvr(prob, noise, 0.2, seed=5, overrides={"T": 40})
    assert rvr.ledger.hvp > 0 and rvr.ledger.hess == 0
    cr = sv.cubic_rvr(prob, noise, 0.2, seed=5, overrides={"T": 4, "n_H": 30})
    assert cr.ledger.hess > 0  # Hessian subsamples feed the cubic model


# ---------------------------------------------------------------------------
# plain SGD baseline


def test_sgd_baseline_noiseless():
    quiet = NoiseParams(sigma1=0.0, sigma2=0.0)
    res = sv.sgd_baseline(quad3(), quiet, 0.05, step_size=0.3, horizon=50, seed=3)
    assert res.grad_norm_exact < 1e-6
    assert res.ledger.as_dict() == {"grad": 50, "hvp": 0, "hess": 0, "value": 0}
    assert res.first_passage_step is None


def test_sgd_baseline_first_passage():
    quiet = NoiseParams(sigma1=0.0, sigma2=0.0)
    res = sv.sgd_baseline(
        quad3(), quiet, 0.05, step_size=0.3, horizon=50, seed=3, track_first_passage=True
    )
    # |x_t| = 0.4^t * sqrt(3); first step with gradient norm <= 0.05 is t = 10
    assert res.first_passage_step == 10
    assert res.first_passage_queries == 10


def test_sgd_baseline_rejects_unstable_step():
    with pytest.raises(ConfigError):
        sv.sgd_baseline(quad3(), NOISE, 0.05, step_size=0.6, horizon=10, seed=1)
    with pytest.raises(ConfigError):
        sv.sgd_baseline_batch(quad3(), NOISE, 0.05, step_size=0.6, horizon=10, n_reps=2, seed=1)


def test_sgd_baseline_batch_contract():
    quiet = NoiseParams(sigma1=0.0, sigma2=0.0)
    fp, ok, X, steps = sv.sgd_baseline_batch(
        quad3(), quiet, 0.05, step_size=0.3, horizon=30, n_reps=4, seed=9
    )
    assert fp.shape == (4,) and ok.shape == (4,) and X.shape == (4, 3)
    assert ok.all() and (fp <= 30).all()
    # short-circuits once every replication has passed
    assert steps == int(fp.max())


def test_sgd_baseline_batch_marks_unfinished_with_nan():
    fp, ok, X, steps = sv.sgd_baseline_batch(
        quad3(), NOISE, 0.05, step_size=0.3, horizon=30, n_reps=4, seed=9
    )
    # sigma1 = 1 keeps every replication above the 0.05 target for 30 steps
    assert not ok.any() and np.isnan(fp).all() and steps == 30
    fp2, ok2, X2, steps2 = sv.sgd_baseline_batch(
        quad3(), NOISE, 0.05, step_size=0.3, horizon=30, n_reps=4, seed=9
    )
    assert np.array_equal(ok, ok2) and np.array_equal(X, X2) and steps == steps2
