"""Chain-structured hard instances and their resisting stochastic oracles.

Two coordinate-chain constructions, both built from a smooth ramp
(``psi``, zero until 1/2, saturating at e) composed with a link function:

* kind ``"eps"``: links through a Gaussian integral (``phi``); any point
  whose last coordinate has not been pushed past 1 keeps gradient norm
  above 1, so driving the gradient below a target forces progress down
  the whole chain;
* kind ``"gamma"``: links through a Gaussian bump (``lambda_fn``); any
  point whose last coordinates are small sits on curvature below -1/2,
  so reaching approximate positive semidefiniteness forces progress.

Progress is measured by ``prog``: the largest coordinate index (counting a
virtual anchor x_0 = 1) whose magnitude exceeds a threshold.  Derivatives at
any point occupy only coordinates up to prog + 1, which is what makes the
resisting oracle work: it reveals the one informative slice with probability
rho and rescales it by z/rho (z Bernoulli(rho)), staying unbiased while
keeping every query's variance inside the oracle class and making progress
per query a coin flip.

Scaling recipes place the chains inside a target regularity class
(delta, l1, l2, sigma1, sigma2) at accuracy eps (gradient norm) or gamma
(curvature), using measured bounds on the unscaled chains' derivative and
slice norms (conservative grid/probe suprema with a safety margin).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels
from ._rng import make_generator
from .core.problems import ProblemInstance, RegularityParams, TridiagonalHessianMixin
from .errors import ConfigError

_KIND_CODE = {"eps": 0, "gamma": 1}

# Per-link upper bound on (value at the all-zeros point) - (infimum), so the
# initial suboptimality of a T-link chain is at most rate * T.
CHAIN_GAP_RATE = {"eps": 12.0, "gamma": 40.0}

# Slice-reveal threshold per kind: the gradient-hard estimators gate at 1/4,
# the curvature-hard Hessian estimator gates at exact support (threshold 0).
REVEAL_THRESHOLD = {"eps": 0.25, "gamma": 0.0}


def _as_array(x) -> tuple[np.ndarray, bool]:
    arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    return arr, np.ndim(x) == 0


def psi(x, order: int = 0):
    """Smooth ramp component: 0 for x <= 1/2, exp(1 - (2x-1)^-2) beyond."""
    if order not in (0, 1, 2):
        raise ConfigError("order must be 0, 1, or 2")
    arr, scalar = _as_array(x)
    out = _kernels.psi_arr(arr.ravel(), order).reshape(arr.shape)
    return float(out[0]) if scalar else out


def phi(x, order: int = 0):
    """Gaussian-integral link: sqrt(e) * integral of exp(-t^2/2) up to x."""
    if order not in (0, 1, 2):
        raise ConfigError("order must be 0, 1, or 2")
    arr, scalar = _as_array(x)
    out = _kernels.phi_arr(arr.ravel(), order).reshape(arr.shape)
    return float(out[0]) if scalar else out


def lambda_fn(x, order: int = 0):
    """Gaussian-bump link: 8 (exp(-x^2/2) - 1), bounded in [-8, 0]."""
    if order not in (0, 1, 2):
        raise ConfigError("order must be 0, 1, or 2")
    arr, scalar = _as_array(x)
    out = _kernels.lam_arr(arr.ravel(), order).reshape(arr.shape)
    return float(out[0]) if scalar else out


def prog(x: np.ndarray, alpha: float = 0.0) -> int:
    """Largest index whose coordinate exceeds alpha in magnitude.

    The virtual anchor coordinate x_0 = 1 means the result is 0 when no
    actual coordinate qualifies (for thresholds alpha < 1).
    """
    if alpha < 0:
        raise ConfigError("alpha must be >= 0")
    idx = np.nonzero(np.abs(np.asarray(x)) > alpha)[0]
    return int(idx[-1] + 1) if idx.size else 0


@dataclass
class TridiagonalMatrix:
    """Symmetric tridiagonal Hessian in band form."""

    diag: np.ndarray
    off: np.ndarray

    def to_dense(self) -> np.ndarray:
        T = self.diag.shape[0]
        H = np.diag(self.diag)
        if T > 1:
            H += np.diag(self.off, 1) + np.diag(self.off, -1)
        return H

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.diag * v
        if self.off.size:
            out[:-1] += self.off * v[1:]
            out[1:] += self.off * v[:-1]
        return out

    def lambda_min(self) -> float:
        from scipy.linalg import eigh_tridiagonal

        if self.off.size == 0:
            return float(self.diag.min())
        return float(eigh_tridiagonal(self.diag, self.off, select="i",
                                      select_range=(0, 0), eigvals_only=True)[0])


@dataclass(frozen=True)
class ChainFunction:
    """Scaled chain x -> alpha * f(beta * x) with T links."""

    kind: str
    length: int
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if self.kind not in _KIND_CODE:
            raise ConfigError(f"unknown chain kind {self.kind!r}")
        if self.length < 1:
            raise ConfigError("length must be >= 1")
        if self.alpha <= 0 or self.beta <= 0:
            raise ConfigError("alpha and beta must be > 0")

    @property
    def code(self) -> int:
        return _KIND_CODE[self.kind]

    def value(self, x: np.ndarray) -> float:
        return self.alpha * _kernels.chain_value1(self.beta * x, self.code)

    def grad(self, x: np.ndarray) -> np.ndarray:
        return self.alpha * self.beta * _kernels.chain_grad1(self.beta * x, self.code)

    def hess_bands(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        d, o = _kernels.chain_bands1(self.beta * x, self.code)
        s = self.alpha * self.beta**2
        return s * d, s * o

    def grad_many(self, X: np.ndarray) -> np.ndarray:
        return self.alpha * self.beta * _kernels.chain_grad(self.beta * X, self.code)

    def value_many(self, X: np.ndarray) -> np.ndarray:
        return self.alpha * _kernels.chain_value(self.beta * X, self.code)

    def hess_bands_many(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        D, O = _kernels.chain_bands(self.beta * X, self.code)
        s = self.alpha * self.beta**2
        return s * D, s * O


def chain_eval(chain: ChainFunction, x: np.ndarray) -> tuple[float, np.ndarray, TridiagonalMatrix]:
    """(value, gradient, tridiagonal Hessian) at x."""
    diag, off = chain.hess_bands(x)
    return chain.value(x), chain.grad(x), TridiagonalMatrix(diag=diag, off=off)


class ChainProblem(TridiagonalHessianMixin, ProblemInstance):
    """Chain construction wrapped as a solver-facing instance."""

    def __init__(self, chain: ChainFunction, x0: np.ndarray | None = None,
                 regularity: RegularityParams | None = None):
        self.chain = chain
        self.dim = chain.length
        self.name = f"chain_{chain.kind}"
        self.x0 = np.zeros(self.dim) if x0 is None else np.asarray(x0, dtype=np.float64)
        if regularity is None:
            consts = measure_chain_constants(chain.kind)
            regularity = RegularityParams(
                delta=chain.alpha * CHAIN_GAP_RATE[chain.kind] * chain.length,
                l1=chain.alpha * chain.beta**2 * consts.ell1,
                l2=chain.alpha * chain.beta**3 * consts.ell2,
            )
        self.regularity = regularity

    def value(self, x: np.ndarray) -> float:
        return self.chain.value(x)

    def grad(self, x: np.ndarray) -> np.ndarray:
        return self.chain.grad(x)

    def hess_bands(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.chain.hess_bands(x)

    def hess(self, x: np.ndarray) -> np.ndarray:
        diag, off = self.chain.hess_bands(x)
        return TridiagonalMatrix(diag=diag, off=off).to_dense()

    def hvp(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        diag, off = self.chain.hess_bands(x)
        return TridiagonalMatrix(diag=diag, off=off).matvec(v)

    def hvp_many(self, points: np.ndarray, v: np.ndarray) -> np.ndarray:
        D, O = self.chain.hess_bands_many(points)
        out = D * v
        if O.shape[1]:
            out[:, :-1] += O * v[1:]
            out[:, 1:] += O * v[:-1]
        return out

    def grad_many(self, points: np.ndarray) -> np.ndarray:
        return self.chain.grad_many(points)

    def value_many(self, points: np.ndarray) -> np.ndarray:
        return self.chain.value_many(points)


# ---------------------------------------------------------------------------
# measured bounds on the unscaled chains


@dataclass(frozen=True)
class ChainConstants:
    """Conservative suprema for one chain kind.

    ell0: max gradient entry magnitude (slice bound, order 1).
    ell1: max Hessian row 1-norm (operator-norm and slice bound, order 2).
    ell2: Hessian Lipschitz constant (probed via finite differences).
    """

    ell0: float
    ell1: float
    ell2: float


_GRID_MARGIN = 1.05
_FD_MARGIN = 1.10


def _pair_tables(kind: int, n: int = 601, span: float = 4.5):
    from ._kernels import _fallback as fb

    t = np.linspace(-span, span, n)
    a = t[:, None]
    b = t[None, :]
    return t, {
        "dhdb": fb._dh_db(kind, a, b),
        "dhda": fb._dh_da(kind, a, b),
        "d2hdb2": fb._d2h_db2(kind, a, b),
        "d2hda2": fb._d2h_da2(kind, a, b),
        "d2hdadb": fb._d2h_dadb(kind, a, b),
    }


@lru_cache(maxsize=None)
def measure_chain_constants(kind: str) -> ChainConstants:
    """Grid/probe suprema of the unscaled chain's derivative norms.

    A gradient entry at position j is dh/db(x_{j-1}, x_j) + dh/da(x_j, x_{j+1})
    and a Hessian row involves the same three coordinates, so the suprema are
    over function triples and decompose into per-middle-coordinate extrema of
    two-argument tables (sup of a sum is bounded by the sum of sups).  The
    Hessian Lipschitz bound uses symmetric-difference probes on short chains.
    All results are inflated by a safety margin; overestimates only make the
    scaled instances more conservative, never invalid.
    """
    code = _KIND_CODE[kind]
    t, tab = _pair_tables(code)

    # ell0: sup over (a, b, c) of |dhdb(a, b) + dhda(b, c)|.
    f1max, f1min = tab["dhdb"].max(axis=0), tab["dhdb"].min(axis=0)
    f2max, f2min = tab["dhda"].max(axis=1), tab["dhda"].min(axis=1)
    ell0 = float(np.maximum(np.abs(f1max + f2max), np.abs(f1min + f2min)).max())

    # ell1: sup Hessian row 1-norm <= sup_a|off(a,b)| + sup_{a,c}|diag| + sup_c|off(b,c)|.
    off_in = np.abs(tab["d2hdadb"]).max(axis=0)
    off_out = np.abs(tab["d2hdadb"]).max(axis=1)
    dmax = tab["d2hdb2"].max(axis=0) + tab["d2hda2"].max(axis=1)
    dmin = tab["d2hdb2"].min(axis=0) + tab["d2hda2"].min(axis=1)
    mid = np.maximum(np.abs(dmax), np.abs(dmin))
    ell1 = float((off_in + mid + off_out).max())

    # ell2: finite-difference probes of the Hessian difference quotient on a
    # short chain (rows only see a 3-coordinate window, so T = 6 suffices).
    rng = make_generator(20_240_817)
    T = 6
    n_probes = 4000
    X = rng.uniform(-3.0, 3.0, size=(n_probes, T))
    V = rng.standard_normal((n_probes, T))
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    h = 1e-4
    Dp, Op = _kernels.chain_bands(X + h * V, code)
    Dm, Om = _kernels.chain_bands(X - h * V, code)
    dd = np.abs(Dp - Dm)
    do = np.abs(Op - Om)
    rowsum = dd.copy()
    rowsum[:, :-1] += do
    rowsum[:, 1:] += do
    rates = rowsum.max(axis=1) / (2.0 * h)
    ell2 = float(rates.max())

    return ChainConstants(ell0=_GRID_MARGIN * ell0, ell1=_GRID_MARGIN * ell1,
                          ell2=_FD_MARGIN * ell2)


# ---------------------------------------------------------------------------
# resisting oracle and zero-respecting simulation


@dataclass
class ZeroChainAnswer:
    """One oracle round: gradient and Hessian estimates sharing a reveal coin."""

    grad: np.ndarray
    hess: np.ndarray
    revealed: bool


class ZeroChainOracle:
    """Unbiased resisting oracle for a scaled chain.

    Coordinates at or below prog of the (unscaled) query point are answered
    exactly; the slices above it are multiplied by z/rho with
    z ~ Bernoulli(rho).  The prog threshold is 1/4 for the gradient-hard
    chain and 0 (exact support) for the curvature-hard chain.  Only the
    slice immediately above prog can be nonzero, so each query reveals it
    with probability rho and the estimate stays unbiased with slice variance
    (1-rho)/rho times the squared slice norm.  Hessian answers are row-slice
    scaled and may be asymmetric when the reveal coin fires.

    For the curvature chain the gradient channel is exact (noiseless):
    its gradient never points outside the discovered support, so gating
    it is unnecessary.  Every query consumes exactly one Bernoulli draw.
    """

    def __init__(self, chain: ChainFunction, rho: float, seed: int):
        if not (0.0 < rho <= 1.0):
            raise ConfigError("rho must be in (0, 1]")
        self.chain = chain
        self.rho = rho
        self.rng = make_generator(seed)
        self.rounds = 0
        self.noiseless_gradient = chain.kind == "gamma"
        self.threshold = REVEAL_THRESHOLD[chain.kind]

    def _reveal_factor(self) -> tuple[float, bool]:
        z = bool(self.rng.random() < self.rho)
        return (1.0 / self.rho if z else 0.0), z

    def _grad_parts(self, x: np.ndarray) -> tuple[np.ndarray, int]:
        y = self.chain.beta * np.asarray(x, dtype=np.float64)
        g = self.chain.grad(x)
        return g, prog(y, self.threshold)

    def _hess_parts(self, x: np.ndarray) -> tuple[np.ndarray, int]:
        y = self.chain.beta * np.asarray(x, dtype=np.float64)
        diag, off = self.chain.hess_bands(x)
        return TridiagonalMatrix(diag=diag, off=off).to_dense(), prog(y, self.threshold)

    def query(self, x: np.ndarray, order: int) -> np.ndarray:
        """Single-channel estimate of the order-th derivative (one round)."""
        if order not in (1, 2):
            raise ConfigError("order must be 1 or 2")
        self.rounds += 1
        factor, _ = self._reveal_factor()
        if order == 1:
            g, j = self._grad_parts(x)
            if not self.noiseless_gradient:
                g[j:] *= factor
            return g
        H, j = self._hess_parts(x)
        H[j:, :] *= factor
        return H

    def answer(self, x: np.ndarray) -> ZeroChainAnswer:
        """Gradient and Hessian estimates under one shared coin (one round)."""
        self.rounds += 1
        factor, z = self._reveal_factor()
        g, j = self._grad_parts(x)
        if not self.noiseless_gradient:
            g[j:] *= factor
        H, _ = self._hess_parts(x)
        H[j:, :] *= factor
        return ZeroChainAnswer(grad=g, hess=H, revealed=z)


def slice_support(answer: np.ndarray) -> set[int]:
    """1-based indices of exactly-nonzero slices (entries or rows)."""
    arr = np.asarray(answer)
    if arr.ndim == 1:
        idx = np.nonzero(arr != 0.0)[0]
    else:
        idx = np.nonzero(np.any(arr != 0.0, axis=1))[0]
    return {int(i) + 1 for i in idx}


@dataclass
class RunTrace:
    """Trajectory of a zero-respecting run: progress after each round."""

    events: list[tuple[int, int]]  # (round, prog) recorded at changes
    rounds: int
    final_prog: int
    completed: bool


def zero_respecting_run(oracle: ZeroChainOracle, max_rounds: int) -> RunTrace:
    """Greedy support-chasing run against a resisting oracle.

    The iterate places unscaled coordinate 1 on every discovered slice (the
    fastest any zero-respecting method can push prog); each round queries
    gradient and Hessian under one shared coin and extends the support by any
    slice that came back nonzero.  Returns the progress trace.
    """
    T = oracle.chain.length
    k = 0
    x = np.zeros(T)
    fill = 1.0 / oracle.chain.beta
    events = [(0, 0)]
    rounds = 0
    while k < T and rounds < max_rounds:
        ans = oracle.answer(x)
        rounds += 1
        seen = slice_support(ans.grad) | slice_support(ans.hess)
        new_k = max(seen | {k})
        if new_k > k:
            k = new_k
            x[:k] = fill
            events.append((rounds, k))
    return RunTrace(events=events, rounds=rounds, final_prog=k, completed=(k >= T))


def progress_bound(T: int, rho: float, fail_prob: float) -> float:
    """Round count below which prog stays short of T w.p. >= 1 - fail_prob:
    (T - ln(1/fail_prob)) / (2 rho)."""
    if not (0 < fail_prob < 1):
        raise ConfigError("fail_prob must be in (0, 1)")
    return (T - math.log(1.0 / fail_prob)) / (2.0 * rho)


# ---------------------------------------------------------------------------
# scaling recipes


@dataclass
class HardInstanceBundle:
    """A scaled chain, its resisting-oracle parameters, and the audit hooks."""

    chain: ChainFunction
    rho: float
    target: dict
    constants: ChainConstants
    query_lower_bound: float
    regime_ok: bool
    regime_notes: list[str] = field(default_factory=list)

    def make_oracle(self, seed: int) -> ZeroChainOracle:
        return ZeroChainOracle(self.chain, self.rho, seed)

    def problem(self) -> ChainProblem:
        return ChainProblem(self.chain)

    def summary(self) -> dict:
        return {
            "kind": self.chain.kind,
            "length": self.chain.length,
            "alpha": self.chain.alpha,
            "beta": self.chain.beta,
            "rho": self.rho,
            "query_lower_bound": self.query_lower_bound,
            "regime_ok": self.regime_ok,
            "regime_notes": self.regime_notes,
            **{f"target_{k}": v for k, v in self.target.items()},
        }


def build_eps_hard_instance(eps: float, l1: float, l2: float, sigma1: float,
                            sigma2: float, delta: float) -> HardInstanceBundle:
    """Scale the gradient-hard chain into the class (delta, l1, l2, sigma1,
    sigma2) so that every point with an unfinished chain has gradient norm
    above 2 eps, and queries reveal progress with probability rho.

    Requires sigma1, sigma2 > 0 (the resisting oracle's slice noise must fit
    inside both channel budgets).  Refuses degenerate scalings with fewer
    than 3 links.
    """
    if eps <= 0 or delta <= 0 or l1 <= 0 or l2 <= 0:
        raise ConfigError("eps, delta, l1, l2 must be > 0")
    if sigma1 <= 0 or sigma2 <= 0:
        raise ConfigError("the gradient-hard construction needs sigma1, sigma2 > 0")
    c = measure_chain_constants("eps")
    beta = min(c.ell0 * sigma2 / (c.ell1 * sigma1),
               l1 / (2.0 * eps * c.ell1),
               math.sqrt(l2 / (2.0 * eps * c.ell2)))
    alpha = 2.0 * eps / beta
    T = math.floor(delta * beta / (2.0 * CHAIN_GAP_RATE["eps"] * eps))
    if T < 3:
        raise ConfigError(
            f"scaling yields T = {T} < 3 links; eps is too large for this class")
    rho = min(1.0, (2.0 * eps * c.ell0 / sigma1) ** 2)
    notes = []
    if eps >= sigma1:
        notes.append("eps >= sigma1: gradient noise does not bind")
    if eps >= math.sqrt(delta * l1):
        notes.append("eps >= sqrt(delta*l1): even a single step could finish")
    chain = ChainFunction(kind="eps", length=T, alpha=alpha, beta=beta)
    return HardInstanceBundle(
        chain=chain, rho=rho,
        target={"eps": eps, "l1": l1, "l2": l2, "sigma1": sigma1,
                "sigma2": sigma2, "delta": delta},
        constants=c, query_lower_bound=(T - 1) / (2.0 * rho),
        regime_ok=not notes, regime_notes=notes)


def build_gamma_hard_instance(gamma: float, l2: float, sigma2: float,
                              delta: float) -> HardInstanceBundle:
    """Scale the curvature-hard chain so that unfinished points have Hessian
    eigenvalue at most -gamma (margin -5 gamma/2) within the class
    (delta, l2, sigma2); the gradient channel is exact.

    The gradient Lipschitz constant implied by the scaling is recorded in
    the target dict (the construction pins l1 = 5 gamma * ell1).
    """
    if gamma <= 0 or delta <= 0 or l2 <= 0:
        raise ConfigError("gamma, delta, l2 must be > 0")
    if sigma2 <= 0:
        raise ConfigError("the curvature-hard construction needs sigma2 > 0")
    c = measure_chain_constants("gamma")
    beta = l2 / (5.0 * c.ell2 * gamma)
    alpha = 5.0 * gamma / beta**2
    T = math.floor(delta * beta**2 / (5.0 * CHAIN_GAP_RATE["gamma"] * gamma))
    if T < 3:
        raise ConfigError(
            f"scaling yields T = {T} < 3 links; gamma is too large for this class")
    rho = min(1.0, (5.0 * c.ell1 * gamma / sigma2) ** 2)
    implied_l1 = 5.0 * gamma * c.ell1
    chain = ChainFunction(kind="gamma", length=T, alpha=alpha, beta=beta)
    return HardInstanceBundle(
        chain=chain, rho=rho,
        target={"gamma": gamma, "l2": l2, "sigma2": sigma2, "delta": delta,
                "implied_l1": implied_l1},
        constants=c, query_lower_bound=(T - 2) / (2.0 * rho),
        regime_ok=True, regime_notes=[])


# ---------------------------------------------------------------------------
# structural audits


@dataclass
class AuditCheck:
    name: str
    passed: bool
    margin: float
    detail: str = ""


def _row_norms_from_bands(diag: np.ndarray, off: np.ndarray) -> np.ndarray:
    r2 = diag**2
    if off.size:
        r2[:-1] += off**2
        r2[1:] += off**2
    return np.sqrt(r2)


def _audit_probes(rng, T: int, beta: float, n_random: int) -> np.ndarray:
    """Random box probes plus sign-prefix probes hitting a spread of prog
    levels, in solver (scaled) coordinates."""
    Y = rng.uniform(-2.0, 2.0, size=(n_random, T))
    levels = np.unique(np.linspace(0, T - 1, num=min(T, 32), dtype=int))
    prefixes = np.zeros((levels.size, T))
    for row, k in enumerate(levels):
        if k:
            prefixes[row, :k] = rng.choice([-1.0, 1.0], size=k)
    return np.vstack([Y, prefixes]) / beta


def audit_hard_instance(bundle: HardInstanceBundle, n_probes: int = 200,
                        seed: int = 0) -> list[AuditCheck]:
    """Sampled structural checks that the scaled instance sits in its class:

    * large gradient (eps kind) / negative curvature (gamma kind) wherever
      the chain is unfinished;
    * gradient/Hessian Lipschitz constants within the declared l1/l2;
    * zero-chain support: answers vanish exactly beyond the frontier slice;
    * per-query estimator variance within the channel budgets (computed
      exactly from the revealed slice norm);
    * initial suboptimality within delta.

    All Hessian work stays in band form, so long chains audit in O(T) per
    probe.  The probe count is budgeted down for very long chains.
    """
    rng = make_generator(seed)
    chain = bundle.chain
    T = chain.length
    n_eff = int(max(4, min(n_probes, 2_000_000 // T)))
    checks: list[AuditCheck] = []
    tol = 1e-3

    # probes for the unfinished-chain property (tail coordinates held small)
    Y = rng.uniform(-2.0, 2.0, size=(n_eff, T))
    if chain.kind == "eps":
        Y[:, -1] = rng.uniform(-0.9, 0.9, size=n_eff)  # prog_1 < T
        X = Y / chain.beta
        gn = np.linalg.norm(chain.grad_many(X), axis=1)
        eps = bundle.target["eps"]
        checks.append(AuditCheck(
            name="gradient_norm_on_unfinished",
            passed=bool((gn >= eps).all()),
            margin=float(gn.min() / eps),
            detail=f"min ||grad|| = {gn.min():.4g} vs eps = {eps:.4g}"))
        l1, l2 = bundle.target["l1"], bundle.target["l2"]
    else:
        Y[:, -2:] = rng.uniform(-0.85, 0.85, size=(n_eff, 2))  # prog_{9/10} < T-1
        X = Y / chain.beta
        gamma = bundle.target["gamma"]
        lam_mins = []
        for xp in X:
            diag, off = chain.hess_bands(xp)
            lam_mins.append(TridiagonalMatrix(diag=diag, off=off).lambda_min())
        lam_mins = np.array(lam_mins)
        checks.append(AuditCheck(
            name="curvature_on_unfinished",
            passed=bool((lam_mins <= -gamma).all()),
            margin=float(lam_mins.max() / -gamma),
            detail=f"max lambda_min = {lam_mins.max():.4g} vs -gamma = {-gamma:.4g}"))
        l1, l2 = bundle.target["implied_l1"], bundle.target["l2"]

    # Lipschitz audits via random symmetric differences
    Xa = rng.uniform(-2.0, 2.0, size=(n_eff, T)) / chain.beta
    V = rng.standard_normal((n_eff, T))
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    h = 1e-4
    Ga = chain.grad_many(Xa + h * V)
    Gb = chain.grad_many(Xa - h * V)
    rate1 = np.linalg.norm(Ga - Gb, axis=1) / (2 * h)
    checks.append(AuditCheck(
        name="gradient_lipschitz",
        passed=bool((rate1 <= l1 * (1 + tol)).all()),
        margin=float(rate1.max() / l1),
        detail=f"max rate = {rate1.max():.4g} vs l1 = {l1:.4g}"))
    Da, Oa = chain.hess_bands_many(Xa + h * V)
    Db, Ob = chain.hess_bands_many(Xa - h * V)
    dd, do = np.abs(Da - Db), np.abs(Oa - Ob)
    rowsum = dd.copy()
    rowsum[:, :-1] += do
    rowsum[:, 1:] += do
    rate2 = rowsum.max(axis=1) / (2 * h)
    checks.append(AuditCheck(
        name="hessian_lipschitz",
        passed=bool((rate2 <= l2 * (1 + tol)).all()),
        margin=float(rate2.max() / l2),
        detail=f"max rate = {rate2.max():.4g} vs l2 = {l2:.4g}"))

    # support and exact per-query estimator variance over mixed probes
    # (random boxes plus sign prefixes, which hit every reveal frontier)
    rho = bundle.rho
    threshold = REVEAL_THRESHOLD[chain.kind]
    var_factor = (1.0 - rho) / rho if rho < 1 else 0.0
    Xm = _audit_probes(rng, T, chain.beta, n_eff)
    support_ok = True
    support_worst = 0.0
    worst1 = 0.0
    worst2 = 0.0
    for xp in Xm:
        j = prog(chain.beta * xp, threshold)
        g = chain.grad(xp)
        diag, off = chain.hess_bands(xp)
        rows = _row_norms_from_bands(diag, off)
        tail = 0.0
        if j + 1 < T:
            tail = max(float(np.abs(g[j + 1:]).max()), float(rows[j + 1:].max()))
        support_worst = max(support_worst, tail)
        support_ok = support_ok and tail == 0.0
        if j < T:
            worst1 = max(worst1, float(g[j] ** 2) * var_factor)
            worst2 = max(worst2, float(rows[j] ** 2) * var_factor)
    checks.append(AuditCheck(
        name="zero_chain_support",
        passed=support_ok,
        margin=support_worst,
        detail=f"max answer magnitude beyond frontier slice = {support_worst:.4g}"))
    if chain.kind == "eps":
        sigma1 = bundle.target["sigma1"]
        checks.append(AuditCheck(
            name="gradient_estimator_variance",
            passed=worst1 <= sigma1**2 * (1 + tol),
            margin=worst1 / sigma1**2,
            detail=f"max var = {worst1:.4g} vs sigma1^2 = {sigma1**2:.4g}"))
    sigma2 = bundle.target["sigma2"]
    checks.append(AuditCheck(
        name="hessian_estimator_variance",
        passed=worst2 <= sigma2**2 * (1 + tol),
        margin=worst2 / sigma2**2,
        detail=f"max var = {worst2:.4g} vs sigma2^2 = {sigma2**2:.4g}"))

    # initial gap within delta
    delta = bundle.target["delta"]
    gap_bound = chain.alpha * CHAIN_GAP_RATE[chain.kind] * T
    checks.append(AuditCheck(
        name="initial_gap",
        passed=gap_bound <= delta * (1 + 1e-12),
        margin=gap_bound / delta,
        detail=f"alpha * rate * T = {gap_bound:.4g} vs delta = {delta:.4g}"))
    return checks
