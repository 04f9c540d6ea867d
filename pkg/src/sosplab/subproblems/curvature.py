"""Negative-curvature search from noisy Hessian-vector products.

``oja_search`` runs a normalized stochastic power-type iteration

    w  <-  normalize(w - eta * H-hat(x) w)

for a fixed budget, then verifies the candidate by averaging stochastic
Rayleigh quotients.  With precision argument g and failure budget delta, the
outcome contract is: a returned direction u satisfies u' H u <= -g, and an
empty outcome certifies H >= -2g I (each up to the delta failure mass).  The
verification threshold sits midway (-1.5 g), so Hoeffding's inequality under
the almost-sure noise bound gives a g/2 margin on both sides; the search
budget covers the iteration count a gap-free power analysis requires at this
precision.  The caller supplies its own ``rng`` for the start vector; all
oracle noise stays on the oracle's stream.

``exact_curvature_direction`` is the deterministic reference used when the
averaged Hessian is formed explicitly: an eigensolve plus the inclusive
threshold test lambda_min <= -4 gamma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core.oracle import StochasticOracle
from ..errors import ConfigError, ContractViolation


@dataclass
class OjaOutcome:
    """Search result: direction is None when PSD-ness was certified."""

    direction: np.ndarray | None
    rayleigh_estimate: float
    iterations: int
    verify_draws: int

    @property
    def found(self) -> bool:
        return self.direction is not None


def oja_search(oracle: StochasticOracle, x: np.ndarray, gamma: float,
               delta: float, rng: np.random.Generator) -> OjaOutcome:
    """Search for curvature below -gamma at x; certify >= -2 gamma otherwise.

    gamma is the precision argument g of the contract above; delta the
    failure probability budget.  Costs the iteration budget plus the
    verification draws, all on the oracle's HVP channel.
    """
    if gamma <= 0:
        raise ConfigError("gamma must be > 0")
    if not (0.0 < delta < 1.0):
        raise ConfigError("delta must be in (0, 1)")
    noise = getattr(oracle, "noise", None)
    if noise is None:
        raise ContractViolation(
            "oja_search needs an oracle with an almost-sure Hessian noise bound")
    sigma_bar = noise.sigma2_as_effective
    l1 = oracle.problem.regularity.l1
    d = oracle.dim

    log_term = 1.0 + math.log(d / delta)
    iterations = max(10, math.ceil(((sigma_bar + l1) / gamma) ** 2 * log_term**2))
    eta = min(1.0 / (4.0 * (l1 + sigma_bar)), gamma / (sigma_bar + gamma) ** 2)

    w = rng.standard_normal(d)
    w /= np.linalg.norm(w)
    for _ in range(iterations):
        w = w - eta * oracle.hvp(x, w)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            w = rng.standard_normal(d)
            nw = np.linalg.norm(w)
        w /= nw

    if sigma_bar > 0.0:
        verify_draws = math.ceil(36.0 * sigma_bar**2 * math.log(2.0 / delta) / gamma**2)
    else:
        verify_draws = 1
    rayleigh = oracle.rayleigh_mean(x, w, verify_draws)

    if rayleigh <= -1.5 * gamma:
        return OjaOutcome(direction=w.copy(), rayleigh_estimate=rayleigh,
                          iterations=iterations, verify_draws=verify_draws)
    return OjaOutcome(direction=None, rayleigh_estimate=rayleigh,
                      iterations=iterations, verify_draws=verify_draws)


def exact_curvature_direction(H: np.ndarray, gamma: float) -> np.ndarray | None:
    """Unit bottom eigenvector of H when lambda_min(H) <= -4 gamma (inclusive),
    else None.  Orientation: first nonzero component positive."""
    if gamma <= 0:
        raise ConfigError("gamma must be > 0")
    evals, Q = np.linalg.eigh(H)
    if evals[0] <= -4.0 * gamma:
        v = Q[:, 0]
        nz = np.nonzero(np.abs(v) > 1e-12 * np.abs(v).max())[0]
        if nz.size and v[nz[0]] < 0:
            v = -v
        return v / np.linalg.norm(v)
    return None


def curvature_step(x: np.ndarray, u: np.ndarray, gamma: float, l2: float,
                   rng: np.random.Generator) -> np.ndarray:
    """Move gamma/l2 along u with a random sign.

    The sign symmetrizes the cubic term of the local expansion, so the
    expected decrease is driven by the curvature of u alone.
    """
    if abs(np.linalg.norm(u) - 1.0) > 1e-8:
        raise ConfigError("u must be unit norm")
    r = float(2 * rng.integers(0, 2) - 1)
    return x + (gamma / l2) * r * u
