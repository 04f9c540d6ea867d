"""Zero-respecting run experiments against resisting chain oracles.

Replays the information-theoretic argument empirically: even the fastest
support-chasing strategy needs roughly one revealed slice per 1/(2 rho)
rounds, so finishing a length-T chain before the progress deadline
should happen with probability at most fail_prob.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .._rng import derive_seed
from ..errors import ConfigError
from ..hard_instances import (ChainFunction, ZeroChainOracle,
                              audit_hard_instance, build_eps_hard_instance,
                              build_gamma_hard_instance, progress_bound,
                              zero_respecting_run)
from .config import ExperimentConfig


@dataclass
class LowerboundOutcome:
    run_rows: list[dict]
    trajectory_rows: list[dict]
    summary: dict
    audit_rows: list[dict] = field(default_factory=list)

    @property
    def bound_respected(self) -> bool:
        return bool(self.summary["bound_respected"])


RUN_COLUMNS = ["run_id", "seed", "rounds", "final_prog", "completed",
               "finished_by_deadline"]


def _oracle_factory(cfg: ExperimentConfig):
    """Build (factory, T, rho, summary extras, audit rows) from the config."""
    kind = cfg.require("kind")
    if cfg.get("use_recipe", False):
        for key in ("delta", "l2", "sigma2"):
            if cfg.get(key) is None:
                raise ConfigError(f"use_recipe requires key {key!r}")
        if kind == "eps":
            for key in ("epsilon", "l1", "sigma1"):
                if cfg.get(key) is None:
                    raise ConfigError(f"eps recipe requires key {key!r}")
            bundle = build_eps_hard_instance(
                eps=float(cfg.require("epsilon")), l1=float(cfg.require("l1")),
                l2=float(cfg.require("l2")),
                sigma1=float(cfg.require("sigma1")),
                sigma2=float(cfg.require("sigma2")),
                delta=float(cfg.require("delta")))
        else:
            if cfg.get("gamma") is None:
                raise ConfigError("gamma recipe requires key 'gamma'")
            bundle = build_gamma_hard_instance(
                gamma=float(cfg.require("gamma")),
                l2=float(cfg.require("l2")),
                sigma2=float(cfg.require("sigma2")),
                delta=float(cfg.require("delta")))
        audits = audit_hard_instance(
            bundle, n_probes=int(cfg.get("audit_probes", 200)),
            seed=derive_seed(cfg.seed, "audit"))
        audit_rows = [{"name": a.name, "passed": a.passed,
                       "margin": a.margin, "detail": a.detail}
                      for a in audits]
        if not all(a.passed for a in audits):
            failed = [a.name for a in audits if not a.passed]
            raise ConfigError(f"hard instance failed structural audits: {failed}")
        return (bundle.make_oracle, bundle.chain.length, bundle.rho,
                bundle.summary(), audit_rows)
    T = int(cfg.require("chain_length"))
    rho = float(cfg.require("rho"))
    if T < 1:
        raise ConfigError("chain_length must be >= 1")
    if not (0.0 < rho <= 1.0):
        raise ConfigError("rho must be in (0, 1]")
    chain = ChainFunction(kind=kind, length=T, alpha=1.0, beta=1.0)
    extras = {"kind": kind, "length": T, "rho": rho,
              "query_lower_bound": (T - 1) / (2.0 * rho)}
    return (lambda seed: ZeroChainOracle(chain, rho, seed), T, rho, extras, [])


def run_lowerbound(cfg: ExperimentConfig) -> LowerboundOutcome:
    """Replicated zero-respecting runs with deadline bookkeeping.

    ``finished_by_deadline`` marks runs that complete within
    progress_bound(T, rho, fail_prob); the lower bound predicts the
    fraction of such runs stays at or below fail_prob (checked here with
    a small-sample allowance of 3 binomial standard deviations).
    """
    make_oracle, T, rho, extras, audit_rows = _oracle_factory(cfg)
    reps = int(cfg.require("replications"))
    fail_prob = float(cfg.get("fail_prob", 0.1))
    deadline = progress_bound(T, rho, fail_prob)
    max_rounds = cfg.get("max_rounds")
    if max_rounds is None:
        max_rounds = math.ceil(5.0 * T / rho)
    max_rounds = int(max_rounds)

    run_rows: list[dict] = []
    trajectory_rows: list[dict] = []
    rounds_completed: list[int] = []
    n_early = 0
    n_completed = 0
    for run_id in range(reps):
        seed = derive_seed(cfg.seed, "lowerbound", run_id)
        trace = zero_respecting_run(make_oracle(seed), max_rounds)
        early = trace.completed and trace.rounds <= deadline
        n_early += int(early)
        n_completed += int(trace.completed)
        if trace.completed:
            rounds_completed.append(trace.rounds)
        run_rows.append({"run_id": run_id, "seed": seed,
                         "rounds": trace.rounds,
                         "final_prog": trace.final_prog,
                         "completed": trace.completed,
                         "finished_by_deadline": early})
        for t, p in trace.events:
            trajectory_rows.append({"run_id": run_id, "t": t, "prog": p})

    early_fraction = n_early / reps
    # The deadline is a (1 - fail_prob) bound on each run; with finitely
    # many replications allow binomial fluctuation around fail_prob.
    allowance = 3.0 * math.sqrt(fail_prob * (1.0 - fail_prob) / reps)
    summary = {
        "replications": reps,
        "fail_prob": fail_prob,
        "deadline_rounds": deadline,
        "max_rounds": max_rounds,
        "completed_fraction": n_completed / reps,
        "finished_by_deadline_fraction": early_fraction,
        "early_fraction_allowed": fail_prob + allowance,
        "bound_respected": early_fraction <= fail_prob + allowance,
        "median_rounds_completed": None if not rounds_completed
        else float(np.median(rounds_completed)),
        "mean_rounds_completed": None if not rounds_completed
        else float(np.mean(rounds_completed)),
        "expected_rounds": T / rho,
        **extras,
    }
    return LowerboundOutcome(run_rows=run_rows,
                             trajectory_rows=trajectory_rows,
                             summary=summary, audit_rows=audit_rows)
