"""Experiment configuration.

Configs are flat JSON objects.  Keys are checked strictly against the
per-command vocabulary: an unknown key is a ConfigError, not a warning,
so typos cannot silently change what an experiment means.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..core.oracle import NoiseParams
from ..core.problems import (LambdaSumProblem, ProblemInstance,
                             QuadraticProblem, RegularityParams)
from ..errors import ConfigError
from ..hard_instances import ChainFunction, ChainProblem

ALGORITHMS = ("sgd", "sgd_hvp_rvr", "cubic_rvr", "sosp_hvp", "sosp_cubic")
PROBLEMS = ("lambda_sum", "quadratic", "chain_eps", "chain_gamma")

_INSTANCE_KEYS = {
    "problem", "dim", "scale", "offsets", "x0", "quad_diag", "quad_b",
    "alpha", "beta", "delta", "l1", "l2",
}
_NOISE_KEYS = {"sigma1", "sigma2", "sigma2_as", "noise_law"}
_SOLVER_KEYS = {"algorithm", "epsilon", "gamma", "overrides", "budget_cap",
                "step_size", "horizon"}

ALLOWED_KEYS: dict[str, set[str]] = {
    "solve": {"command", "seed"} | _INSTANCE_KEYS | _NOISE_KEYS | _SOLVER_KEYS,
    "sweep": ({"command", "seed", "epsilon_grid", "replications", "batched",
               "fit_metric"}
              | _INSTANCE_KEYS | _NOISE_KEYS | (_SOLVER_KEYS - {"epsilon"})),
    "lowerbound": {"command", "seed", "kind", "chain_length", "rho",
                   "fail_prob", "replications", "max_rounds", "use_recipe",
                   "epsilon", "gamma", "delta", "l1", "l2", "sigma1",
                   "sigma2", "audit_probes"},
}

REQUIRED_KEYS: dict[str, set[str]] = {
    "solve": {"algorithm", "problem", "epsilon", "seed"},
    "sweep": {"algorithm", "problem", "epsilon_grid", "replications", "seed"},
    "lowerbound": {"kind", "replications", "seed"},
}

_NUMBER_KEYS = {"dim", "scale", "alpha", "beta", "delta", "l1", "l2",
                "sigma1", "sigma2", "sigma2_as", "epsilon", "gamma", "seed",
                "budget_cap", "step_size", "horizon", "replications",
                "chain_length", "rho", "fail_prob", "max_rounds",
                "audit_probes"}
_LIST_KEYS = {"offsets", "quad_diag", "quad_b", "epsilon_grid"}


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment description for one harness command."""

    command: str
    data: dict

    @property
    def seed(self) -> int:
        return int(self.data["seed"])

    def get(self, key: str, default=None):
        return self.data.get(key, default)

    def require(self, key: str):
        if key not in self.data:
            raise ConfigError(f"{self.command} config requires key {key!r}")
        return self.data[key]

    def to_dict(self) -> dict:
        out = {"command": self.command}
        out.update(self.data)
        return out


def _check_types(command: str, data: dict) -> None:
    for key, val in data.items():
        if key in _NUMBER_KEYS:
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ConfigError(f"key {key!r} must be a number, got {val!r}")
            if not math.isfinite(val):
                raise ConfigError(f"key {key!r} must be finite, got {val!r}")
        elif key in _LIST_KEYS:
            if not isinstance(val, list):
                raise ConfigError(f"key {key!r} must be a list")
        elif key == "overrides":
            if not isinstance(val, dict):
                raise ConfigError("overrides must be an object")
        elif key in ("batched", "use_recipe"):
            if not isinstance(val, bool):
                raise ConfigError(f"key {key!r} must be true or false")
        elif key in ("problem", "algorithm", "noise_law", "kind", "command",
                     "fit_metric"):
            if not isinstance(val, str):
                raise ConfigError(f"key {key!r} must be a string")


def validate_config(command: str, data: dict) -> ExperimentConfig:
    """Check a raw config dict against the vocabulary for ``command``."""
    if command not in ALLOWED_KEYS:
        raise ConfigError(f"unknown command {command!r}")
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    declared = data.get("command")
    if declared is not None and declared != command:
        raise ConfigError(
            f"config declares command {declared!r} but was run as {command!r}")
    unknown = sorted(set(data) - ALLOWED_KEYS[command])
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {unknown}")
    missing = sorted(REQUIRED_KEYS[command] - set(data))
    if missing:
        raise ConfigError(f"missing required config keys: {missing}")
    _check_types(command, data)

    body = {k: v for k, v in data.items() if k != "command"}
    if "algorithm" in body and body["algorithm"] not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {body['algorithm']!r}; "
                          f"expected one of {list(ALGORITHMS)}")
    if "problem" in body and body["problem"] not in PROBLEMS:
        raise ConfigError(f"unknown problem {body['problem']!r}; "
                          f"expected one of {list(PROBLEMS)}")
    if "epsilon_grid" in body:
        grid = body["epsilon_grid"]
        if len(grid) < 1 or any(not isinstance(e, (int, float)) or e <= 0
                                for e in grid):
            raise ConfigError("epsilon_grid must list positive numbers")
        if any(b >= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("epsilon_grid must be strictly decreasing")
    if "replications" in body and int(body["replications"]) < 1:
        raise ConfigError("replications must be >= 1")
    if command == "lowerbound":
        if body["kind"] not in ("eps", "gamma"):
            raise ConfigError("kind must be 'eps' or 'gamma'")
        if not body.get("use_recipe", False):
            for key in ("chain_length", "rho"):
                if key not in body:
                    raise ConfigError(f"lowerbound without use_recipe "
                                      f"requires key {key!r}")
    if "algorithm" in body and body["algorithm"] in ("sosp_hvp", "sosp_cubic"):
        if "gamma" not in body:
            raise ConfigError(f"{body['algorithm']} requires key 'gamma'")
    return ExperimentConfig(command=command, data=body)


def load_config(path: str | Path, command: str,
                seed_override: int | None = None) -> ExperimentConfig:
    """Load and validate a JSON config file for ``command``."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {p}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {p} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    if seed_override is not None:
        data = {**data, "seed": int(seed_override)}
    return validate_config(command, data)


def _parse_x0(cfg: ExperimentConfig, dim: int) -> np.ndarray | None:
    raw = cfg.get("x0")
    if raw is None:
        return None
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return np.full(dim, float(raw))
    if isinstance(raw, list):
        arr = np.asarray(raw, dtype=np.float64)
        if arr.shape != (dim,):
            raise ConfigError(f"x0 must have length {dim}, got {arr.shape}")
        return arr
    raise ConfigError("x0 must be a number or a list of numbers")


def build_problem(cfg: ExperimentConfig) -> ProblemInstance:
    """Instantiate the objective described by the config."""
    name = cfg.require("problem")
    dim = int(cfg.require("dim"))
    if dim < 1:
        raise ConfigError("dim must be >= 1")
    x0 = _parse_x0(cfg, dim)

    if name == "lambda_sum":
        offsets = cfg.get("offsets")
        problem: ProblemInstance = LambdaSumProblem(
            dim, offsets=None if offsets is None else np.asarray(offsets, float),
            scale=float(cfg.get("scale", 1.0)), x0=x0)
    elif name == "quadratic":
        diag = cfg.get("quad_diag")
        if diag is None:
            raise ConfigError("quadratic problem requires key 'quad_diag'")
        A = np.diag(np.asarray(diag, dtype=np.float64))
        b = cfg.get("quad_b")
        problem = QuadraticProblem(
            A, b=None if b is None else np.asarray(b, float),
            l2=float(cfg.get("l2", 1.0)), delta=cfg.get("delta"), x0=x0)
    else:
        kind = "eps" if name == "chain_eps" else "gamma"
        chain = ChainFunction(kind=kind, length=dim,
                              alpha=float(cfg.get("alpha", 1.0)),
                              beta=float(cfg.get("beta", 1.0)))
        problem = ChainProblem(chain, x0=x0)

    # Declared class parameters win over the instance's own certificate, so
    # an experiment can run at the class constants its formulas assume even
    # when the concrete instance is easier.
    reg = problem.regularity
    override = {k: cfg.get(k) for k in ("delta", "l1", "l2")
                if cfg.get(k) is not None}
    if override:
        problem.regularity = RegularityParams(
            delta=float(override.get("delta", reg.delta)),
            l1=float(override.get("l1", reg.l1)),
            l2=float(override.get("l2", reg.l2)))
    return problem


def build_noise(cfg: ExperimentConfig) -> NoiseParams:
    sigma2_as = cfg.get("sigma2_as")
    return NoiseParams(sigma1=float(cfg.get("sigma1", 0.0)),
                       sigma2=float(cfg.get("sigma2", 0.0)),
                       sigma2_as=None if sigma2_as is None else float(sigma2_as),
                       law=cfg.get("noise_law", "rademacher"))
