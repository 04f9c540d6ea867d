"""Stochastic oracles with exact per-channel query accounting.

The additive oracle perturbs exact derivatives with controlled noise:

* gradient channel: sigma1 * xi * u with xi a Rademacher sign and u uniform
  on the unit sphere, so every draw has norm exactly sigma1 (a Gaussian
  alternative with covariance sigma1^2/d I sits behind ``law="gaussian"``);
* Hessian channel: sigma2 * xi * u u', a rank-one perturbation with operator
  norm exactly sigma2, which also serves as the almost-sure bound.

Draw order is part of the reproducibility contract: each batch of n draws
consumes first an (n, dim) block of standard normals, then n sign draws
(Rademacher law only).  A single draw is the n=1 batch, so interleaving
single and batched queries is well defined.

Finite-sum oracles sample a component index instead; their Hessian channel
is exactly the Jacobian of the gradient channel, which is what
``verify_mss_equivalence`` certifies.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .._rng import make_generator
from ..errors import ConfigError, ContractViolation
from .problems import FiniteSumProblem, ProblemInstance

_PATH_CHUNK = 16384
_KAHAN_THRESHOLD = 10_000


@dataclass(frozen=True)
class NoiseParams:
    """Noise configuration for the additive stochastic oracle.

    sigma2_as is the almost-sure operator-norm bound on Hessian noise; the
    rank-one law satisfies it with sigma2 itself, so ``None`` means sigma2.
    """

    sigma1: float = 0.0
    sigma2: float = 0.0
    sigma2_as: float | None = None
    mode: str = "single_point"
    n_points: int = 2
    law: str = "rademacher"

    def __post_init__(self):
        if self.sigma1 < 0 or self.sigma2 < 0:
            raise ConfigError("sigma1 and sigma2 must be >= 0")
        if self.mode not in ("single_point", "n_point"):
            raise ConfigError(f"unknown oracle mode {self.mode!r}")
        if self.mode == "n_point" and self.n_points < 2:
            raise ConfigError("n_point mode needs n_points >= 2")
        if self.law not in ("rademacher", "gaussian"):
            raise ConfigError(f"unknown noise law {self.law!r}")
        if self.sigma2_as is not None and self.sigma2_as < self.sigma2:
            raise ConfigError("sigma2_as cannot be smaller than sigma2")

    @property
    def sigma2_as_effective(self) -> float:
        return self.sigma2 if self.sigma2_as is None else self.sigma2_as


@dataclass
class QueryLedger:
    """Per-channel query counts; one unit per stochastic draw."""

    grad: int = 0
    hvp: int = 0
    hess: int = 0
    value: int = 0

    @property
    def total(self) -> int:
        return self.grad + self.hvp + self.hess + self.value

    def copy(self) -> "QueryLedger":
        return replace(self)

    def minus(self, other: "QueryLedger") -> "QueryLedger":
        return QueryLedger(self.grad - other.grad, self.hvp - other.hvp,
                           self.hess - other.hess, self.value - other.value)

    def as_dict(self) -> dict[str, int]:
        return {"grad": self.grad, "hvp": self.hvp, "hess": self.hess,
                "value": self.value}


@dataclass
class OracleAnswer:
    """One noisy observation of all channels at a point."""

    value: float
    grad: np.ndarray
    hess: np.ndarray

    def __post_init__(self):
        if not np.allclose(self.hess, self.hess.T, atol=1e-10):
            raise ContractViolation("oracle Hessian answers must be symmetric")


class StochasticOracle:
    """Additive-noise oracle over a deterministic instance."""

    def __init__(self, problem: ProblemInstance, noise: NoiseParams, seed: int):
        self.problem = problem
        self.noise = noise
        self.rng = make_generator(seed)
        self.ledger = QueryLedger()

    @property
    def dim(self) -> int:
        return self.problem.dim

    @property
    def supports_shared_draws(self) -> bool:
        return self.noise.mode == "n_point"

    # -- noise primitives ---------------------------------------------------

    def _sphere_and_signs(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        g = self.rng.standard_normal((n, self.dim))
        norms = np.linalg.norm(g, axis=1)
        norms[norms == 0.0] = 1.0
        signs = 2.0 * self.rng.integers(0, 2, size=n) - 1.0
        return g / norms[:, None], signs

    def _grad_noise(self, n: int) -> np.ndarray:
        if self.noise.sigma1 == 0.0:
            return np.zeros((n, self.dim))
        if self.noise.law == "gaussian":
            return self.rng.standard_normal((n, self.dim)) \
                * (self.noise.sigma1 / np.sqrt(self.dim))
        u, s = self._sphere_and_signs(n)
        return self.noise.sigma1 * s[:, None] * u

    # -- gradient channel ---------------------------------------------------

    def grad(self, x: np.ndarray) -> np.ndarray:
        return self.grad_mean(x, 1)

    def grad_mean(self, x: np.ndarray, n: int) -> np.ndarray:
        """Average of n independent gradient draws at x (n ledger units)."""
        self.ledger.grad += n
        exact = self.problem.grad(x)
        if self.noise.sigma1 == 0.0:
            return exact.copy()
        return exact + self._grad_noise(n).mean(axis=0)

    def grad_shared(self, points: list[np.ndarray]) -> list[np.ndarray]:
        """Gradients at several points under one shared draw (1 ledger unit)."""
        if not self.supports_shared_draws:
            raise ContractViolation("shared-draw queries need n_point mode")
        if len(points) > self.noise.n_points:
            raise ContractViolation(
                f"asked for {len(points)} points, mode allows {self.noise.n_points}")
        self.ledger.grad += 1
        zeta = self._grad_noise(1)[0]
        return [self.problem.grad(p) + zeta for p in points]

    # -- Hessian-vector channel ----------------------------------------------

    def hvp(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        self.ledger.hvp += 1
        exact = self.problem.hvp(x, v)
        if self.noise.sigma2 == 0.0:
            return exact
        u, s = self._sphere_and_signs(1)
        u0 = u[0]
        return exact + self.noise.sigma2 * s[0] * (u0 @ v) * u0

    def rayleigh_mean(self, x: np.ndarray, w: np.ndarray, n: int) -> float:
        """Average of n draws of w' H-hat(x) w (n HVP ledger units)."""
        self.ledger.hvp += n
        exact = float(w @ self.problem.hvp(x, w))
        if self.noise.sigma2 == 0.0:
            return exact
        u, s = self._sphere_and_signs(n)
        return exact + self.noise.sigma2 * float(np.mean(s * (u @ w) ** 2))

    def hvp_path_sum(self, x_prev: np.ndarray, x: np.ndarray, K: int) -> np.ndarray:
        """Sum over k=1..K of H-hat(p_{k-1}) (x - x_prev)/K along the segment
        p_j = x_prev + j (x - x_prev)/K, with fresh noise per step (K ledger
        units).  Uses compensated accumulation across chunks for large K.
        """
        if K == 0:
            return np.zeros(self.dim)
        self.ledger.hvp += K
        dx = (x - x_prev) / K
        acc = np.zeros(self.dim)
        comp = np.zeros(self.dim)
        kahan = K > _KAHAN_THRESHOLD
        for k0 in range(0, K, _PATH_CHUNK):
            m = min(_PATH_CHUNK, K - k0)
            points = x_prev + (k0 + np.arange(m))[:, None] * dx
            part = self.problem.hvp_many(points, dx).sum(axis=0)
            if self.noise.sigma2 != 0.0:
                u, s = self._sphere_and_signs(m)
                part = part + self.noise.sigma2 * (u.T @ (s * (u @ dx)))
            if kahan:
                y = part - comp
                t = acc + y
                comp = (t - acc) - y
                acc = t
            else:
                acc = acc + part
        return acc

    # -- full Hessian channel -------------------------------------------------

    def hess(self, x: np.ndarray) -> np.ndarray:
        self.ledger.hess += 1
        exact = self.problem.hess(x)
        if self.noise.sigma2 == 0.0:
            return exact.copy()
        u, s = self._sphere_and_signs(1)
        return exact + (self.noise.sigma2 * s[0]) * np.outer(u[0], u[0])

    def hess_mean(self, x: np.ndarray, n: int) -> np.ndarray:
        """Average of n independent Hessian draws at x (n ledger units)."""
        self.ledger.hess += n
        exact = self.problem.hess(x)
        if self.noise.sigma2 == 0.0:
            return exact.copy()
        u, s = self._sphere_and_signs(n)
        m = (self.noise.sigma2 / n) * (u.T @ (s[:, None] * u))
        m = 0.5 * (m + m.T)
        return exact + m

    # -- value channel --------------------------------------------------------

    def value(self, x: np.ndarray) -> float:
        """Exact objective value (no value noise is modeled)."""
        self.ledger.value += 1
        return self.problem.value(x)

    def sample_answer(self, x: np.ndarray) -> OracleAnswer:
        """One observation of every channel (1 unit each)."""
        v = self.value(x)
        g = self.grad(x)
        h = self.hess(x)
        return OracleAnswer(value=v, grad=g, hess=h)


class FiniteSumOracle:
    """Subsampling oracle over a finite-sum instance.

    The Hessian channel is the exact Jacobian of the gradient channel, so
    the gradient estimator inherits mean-squared smoothness from the
    Hessian variance bound.  Shared draws reuse one component index.
    """

    def __init__(self, problem: FiniteSumProblem, seed: int):
        self.problem = problem
        self.rng = make_generator(seed)
        self.ledger = QueryLedger()

    @property
    def dim(self) -> int:
        return self.problem.dim

    supports_shared_draws = True

    def _draw_index(self) -> int:
        return int(self.rng.integers(self.problem.n_components))

    def grad(self, x: np.ndarray) -> np.ndarray:
        self.ledger.grad += 1
        return self.problem.component_grad(x, self._draw_index())

    def grad_shared(self, points: list[np.ndarray]) -> list[np.ndarray]:
        self.ledger.grad += 1
        idx = self._draw_index()
        return [self.problem.component_grad(p, idx) for p in points]

    def hess(self, x: np.ndarray) -> np.ndarray:
        self.ledger.hess += 1
        return self.problem.component_hess(x, self._draw_index())

    def value(self, x: np.ndarray) -> float:
        self.ledger.value += 1
        return self.problem.value(x)

    def hess_variance(self, x: np.ndarray) -> float:
        """Exact E||H-hat(x) - H(x)||_op^2 over the component distribution."""
        mean = self.problem.hess(x)
        sq = [np.linalg.norm(self.problem.component_hess(x, i) - mean, ord=2) ** 2
              for i in range(self.problem.n_components)]
        return float(np.mean(sq))


class SignRadialOracle:
    """Gradient noise z * x/||x|| with a sign flip z and an exact Hessian.

    The textbook example of a bounded-variance gradient estimator that is
    not mean-squared smooth: antipodal pairs x, -x give a difference of
    norm 2 regardless of ||x - (-x)|| = 2||x||, so the MSS quotient blows
    up near the origin.  The Hessian channel is unrelated to the gradient
    channel (no Jacobian relation).
    """

    def __init__(self, problem: ProblemInstance, seed: int):
        self.problem = problem
        self.rng = make_generator(seed)
        self.ledger = QueryLedger()

    @property
    def dim(self) -> int:
        return self.problem.dim

    supports_shared_draws = True

    def _noise_at(self, x: np.ndarray, z: float) -> np.ndarray:
        n = np.linalg.norm(x)
        if n == 0.0:
            return np.zeros_like(x)
        return z * x / n

    def grad(self, x: np.ndarray) -> np.ndarray:
        self.ledger.grad += 1
        z = float(2 * self.rng.integers(0, 2) - 1)
        return self.problem.grad(x) + self._noise_at(x, z)

    def grad_shared(self, points: list[np.ndarray]) -> list[np.ndarray]:
        self.ledger.grad += 1
        z = float(2 * self.rng.integers(0, 2) - 1)
        return [self.problem.grad(p) + self._noise_at(p, z) for p in points]

    def hess(self, x: np.ndarray) -> np.ndarray:
        self.ledger.hess += 1
        return self.problem.hess(x)

    def value(self, x: np.ndarray) -> float:
        self.ledger.value += 1
        return self.problem.value(x)


def finite_diff_hvp(oracle, x: np.ndarray, u: np.ndarray, delta: float) -> np.ndarray:
    """Hessian-vector product simulated from a shared two-point gradient query.

    Returns (g(x + delta u) - g(x)) / delta for one shared draw; bias is at
    most l2 * delta / 2 for unit u, and the variance matches the gradient
    channel's mean-squared-smoothness constant.  Costs one gradient query.
    """
    if delta <= 0:
        raise ConfigError("delta must be > 0")
    if abs(np.linalg.norm(u) - 1.0) > 1e-8:
        raise ConfigError("u must be unit norm")
    if not getattr(oracle, "supports_shared_draws", False):
        raise ContractViolation("finite_diff_hvp needs shared-draw (n_point) queries")
    g_x, g_xu = oracle.grad_shared([x, x + delta * u])
    return (g_xu - g_x) / delta


@dataclass
class MssReport:
    """Outcome of the mean-squared-smoothness probe."""

    quotients: list[float]
    shrink_quotients: list[float]
    sigma_mss_sq: float
    diverges: bool
    draws_used: int = 0
    details: dict = field(default_factory=dict)

    @property
    def is_mss(self) -> bool:
        return not self.diverges


def verify_mss_equivalence(oracle, n_pairs: int = 24, n_draws: int = 200,
                           shrink_levels: int = 6, seed: int = 0) -> MssReport:
    """Measure the mean-squared-smoothness quotient of a gradient channel.

    Probes E_z ||g(x,z) - g(y,z) - (grad F(x) - grad F(y))||^2 / ||x-y||^2
    over random pairs plus a sequence of antipodal pairs shrinking toward
    the origin (the regime where non-MSS oracles blow up).  Oracles that
    cannot share a draw across points are rejected: the quotient is not
    observable without simultaneous queries.
    """
    if not getattr(oracle, "supports_shared_draws", False):
        raise ContractViolation(
            "verify_mss_equivalence needs shared-draw (n_point) queries")
    rng = make_generator(seed)
    d = oracle.dim
    problem = oracle.problem

    def quotient(x: np.ndarray, y: np.ndarray) -> float:
        exact = problem.grad(x) - problem.grad(y)
        sq = 0.0
        for _ in range(n_draws):
            gx, gy = oracle.grad_shared([x, y])
            sq += float(np.sum((gx - gy - exact) ** 2))
        return sq / n_draws / float(np.sum((x - y) ** 2))

    quotients = []
    for _ in range(n_pairs):
        x = rng.standard_normal(d)
        y = x + rng.standard_normal(d) * rng.choice([1.0, 0.1, 0.01])
        quotients.append(quotient(x, y))

    direction = rng.standard_normal(d)
    direction /= np.linalg.norm(direction)
    shrink = []
    for level in range(shrink_levels):
        x = (10.0 ** -level) * direction
        shrink.append(quotient(x, -x))

    # A bounded quotient stays flat as the pair shrinks; divergence shows up
    # as sustained growth by orders of magnitude.
    base = max(max(quotients), shrink[0], 1e-12)
    diverges = shrink[-1] > 100.0 * base
    sigma_sq = float("inf") if diverges else float(max(max(quotients), max(shrink)))
    return MssReport(quotients=quotients, shrink_quotients=shrink,
                     sigma_mss_sq=sigma_sq, diverges=diverges,
                     draws_used=(n_pairs + shrink_levels) * n_draws)
