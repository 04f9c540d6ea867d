"""Ball-constrained cubic-regularized model minimization.

Solves

    min_{||s|| <= radius}  g's + s'Hs/2 + (M/6)||s||^3

to global optimality via the eigendecomposition of H and a secular-equation
solve in the shift theta = (M/2)||s|| + mu, where mu is the multiplier of the
ball constraint.  KKT system:

    (H + theta I) s = -g,   theta = (M/2)||s|| + mu,
    mu >= 0,  mu (||s|| - radius) = 0,  H + theta I >= 0.

The shifted solution norm r(theta) = ||(H + theta I)^{-1} g|| is strictly
decreasing, so each regime (interior, boundary) reduces to a monotone
root-find in the well-conditioned variable 1/r(theta).  The degenerate
("hard") case, where g has no component in the bottom eigenspace and no
interior shift balances, is closed by augmenting the pseudoinverse solution
with a bottom eigenvector; sign ties break toward the positive orientation of
the eigenvector (first nonzero component positive, nonnegative coefficient).

Numerical regime note: models whose bottom-eigenspace gradient component is
neither zero nor clearly separated from zero (within ~1e-8 of ||g||) sit on
the classification boundary and may only reach ~1e-7 relative residuals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ..errors import ConfigError

_HARD_CLASSIFY_RTOL = 1e-9
_EIG_CLUSTER_RTOL = 1e-10


@dataclass(frozen=True)
class CubicModel:
    """Local model data: gradient g, symmetric H, cubic weight M, ball radius."""

    g: np.ndarray
    H: np.ndarray
    M: float
    radius: float

    def __post_init__(self):
        if self.M <= 0:
            raise ConfigError("M must be > 0")
        if self.radius <= 0:
            raise ConfigError("radius must be > 0")
        if self.H.shape != (self.g.shape[0], self.g.shape[0]):
            raise ConfigError("H/g shape mismatch")
        if not np.allclose(self.H, self.H.T, atol=1e-10 * (1 + np.abs(self.H).max())):
            raise ConfigError("H must be symmetric")

    @property
    def dim(self) -> int:
        return self.g.shape[0]


def model_value(model: CubicModel, s: np.ndarray) -> float:
    ns = float(np.linalg.norm(s))
    return float(model.g @ s + 0.5 * s @ (model.H @ s) + model.M / 6.0 * ns**3)


@dataclass
class CubicStep:
    """Solution with KKT diagnostics."""

    s: np.ndarray
    theta: float
    mu: float
    case: str  # "interior" | "boundary" | "hard_interior" | "hard_boundary"
    kkt_residual: float
    value: float


def _positive_orientation(v: np.ndarray) -> np.ndarray:
    nz = np.nonzero(np.abs(v) > 1e-12 * np.abs(v).max())[0]
    if nz.size and v[nz[0]] < 0:
        return -v
    return v


def _shifted_norm_sq(g_eig: np.ndarray, evals: np.ndarray, theta: float) -> float:
    return float(np.sum((g_eig / (evals + theta)) ** 2))


def solve_cubic_tr(model: CubicModel, tol: float = 1e-10) -> CubicStep:
    """Globally minimize the ball-constrained cubic model.

    Returns the minimizer with the implied shift/multiplier and the KKT
    residual ||g + Hs + ((M/2)||s|| + mu) s|| measured against the original
    (non-eigenbasis) data.
    """
    g, H, M, radius = model.g, model.H, model.M, model.radius
    evals, Q = np.linalg.eigh(H)
    g_eig = Q.T @ g
    gnorm = float(np.linalg.norm(g))
    scale = max(1.0, float(np.abs(evals).max()), gnorm)

    w_min = float(evals[0])
    theta_lo = max(0.0, -w_min)
    bottom = evals - w_min <= _EIG_CLUSTER_RTOL * scale
    g_bottom = float(np.linalg.norm(g_eig[bottom]))
    hard_regime = g_bottom <= _HARD_CLASSIFY_RTOL * (gnorm + 1.0)

    # In the (near-)degenerate regime, solve with the bottom components
    # masked out; they are re-introduced through the eigenvector term.
    g_active = np.where(bottom, 0.0, g_eig) if hard_regime else g_eig

    def r_of(theta: float) -> float:
        return np.sqrt(_shifted_norm_sq(g_active, evals, theta))

    def phi(theta: float) -> float:
        # Increasing reparametrization of the interior condition
        # theta = (M/2) r(theta).
        return 1.0 / r_of(theta) - M / (2.0 * theta)

    def solve_norm_equation(target: float, lo: float, hi: float) -> float:
        # Root of r(theta) = target via the convex-ish 1/r form.
        f = lambda th: 1.0 / r_of(th) - 1.0 / target
        return float(brentq(f, lo, hi, xtol=1e-15 * max(1.0, hi), rtol=8.9e-16))

    def bracket_hi(from_theta: float, cond) -> float:
        hi = from_theta + max(1.0, np.sqrt(M * (gnorm + 1.0)), theta_lo)
        for _ in range(200):
            if cond(hi):
                return hi
            hi *= 2.0
        raise ArithmeticError("failed to bracket the secular root")

    tiny = 1e-14 * scale + 1e-300
    case = ""
    mu = 0.0

    interior_exists = r_of(theta_lo + tiny) > 2.0 * (theta_lo + tiny) / M
    if interior_exists:
        hi = bracket_hi(theta_lo + tiny, lambda th: phi(th) > 0.0)
        theta = float(brentq(phi, theta_lo + tiny, hi,
                             xtol=1e-15 * max(1.0, hi), rtol=8.9e-16))
        r_theta = r_of(theta)
        if r_theta <= radius:
            case = "interior"
            mu = 0.0
        else:
            hi = bracket_hi(theta, lambda th: r_of(th) < radius)
            theta = solve_norm_equation(radius, theta, hi)
            mu = max(0.0, theta - 0.5 * M * radius)
            case = "boundary"
        s_eig = -g_active / (evals + theta)
        if hard_regime:
            s_eig[bottom] = 0.0
    else:
        # Degenerate regime: theta pinned at theta_lo, norm made up by the
        # bottom eigenvector.
        r_reg = r_of(theta_lo + tiny)
        if r_reg >= radius:
            hi = bracket_hi(theta_lo + tiny, lambda th: r_of(th) < radius)
            theta = solve_norm_equation(radius, theta_lo + tiny, hi)
            mu = max(0.0, theta - 0.5 * M * radius)
            case = "boundary"
            s_eig = -g_active / (evals + theta)
            if hard_regime:
                s_eig[bottom] = 0.0
        else:
            theta = theta_lo
            target = min(radius, 2.0 * theta_lo / M)
            denom = np.where(bottom, 1.0, evals + theta_lo)
            s_eig = np.where(bottom, 0.0, -g_active / denom)
            r_reg = float(np.linalg.norm(s_eig))
            tau_sq = max(0.0, target**2 - r_reg**2)
            tau = np.sqrt(tau_sq)
            v = _positive_orientation(Q[:, 0])
            mu = max(0.0, theta_lo - 0.5 * M * target)
            case = "hard_boundary" if target == radius and mu > 0 else "hard_interior"
            s = Q @ s_eig + tau * v
            return _finish(model, s, theta, mu, case)

    s = Q @ s_eig
    return _finish(model, s, theta, mu, case)


def _finish(model: CubicModel, s: np.ndarray, theta: float, mu: float,
            case: str) -> CubicStep:
    ns = float(np.linalg.norm(s))
    shift = 0.5 * model.M * ns + mu
    resid = float(np.linalg.norm(model.g + model.H @ s + shift * s))
    return CubicStep(s=s, theta=theta, mu=mu, case=case,
                     kkt_residual=resid, value=model_value(model, s))


def brute_force_value(model: CubicModel, n_samples: int, seed: int = 0) -> float:
    """Sampled upper bound on the model minimum (random ball points plus
    boundary and axis probes); the solver's value must not exceed it."""
    rng = np.random.default_rng(seed)
    d = model.dim
    dirs = rng.standard_normal((n_samples, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = model.radius * rng.random(n_samples) ** (1.0 / d)
    pts = dirs * radii[:, None]
    boundary = dirs[: n_samples // 4] * model.radius
    evals, Q = np.linalg.eigh(model.H)
    axes = np.concatenate([Q.T, -Q.T]) * model.radius
    cand = np.concatenate([pts, boundary, axes, np.zeros((1, d))])
    vals = (cand @ model.g + 0.5 * np.einsum("ki,ij,kj->k", cand, model.H, cand)
            + model.M / 6.0 * np.linalg.norm(cand, axis=1) ** 3)
    return float(vals.min())
