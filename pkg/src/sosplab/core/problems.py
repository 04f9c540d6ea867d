"""Test problems with certified regularity constants.

Every instance declares (delta, l1, l2): an upper bound on the initial
suboptimality F(x0) - inf F, a Lipschitz constant of the gradient, and a
Lipschitz constant of the Hessian.  Declared constants are upper bounds;
tests cross-check them against finite-difference measurements.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .. import _kernels
from ..errors import ConfigError

# max |third derivative| of the bump component 8(exp(-x^2/2) - 1), attained
# at x* = sqrt(3 - sqrt(6)); see tests for the finite-difference cross-check.
_XSTAR_SQ = 3.0 - np.sqrt(6.0)
LAM_THIRD_MAX = 8.0 * np.sqrt(6.0 * _XSTAR_SQ) * np.exp(-0.5 * _XSTAR_SQ)


@dataclass(frozen=True)
class RegularityParams:
    """Certified regularity of an instance.

    delta: upper bound on F(x0) - inf F.
    l1: Lipschitz constant of the gradient (max operator norm of the Hessian).
    l2: Lipschitz constant of the Hessian.
    """

    delta: float
    l1: float
    l2: float

    def __post_init__(self):
        if not (np.isfinite(self.delta) and self.delta >= 0):
            raise ConfigError(f"delta must be finite and >= 0, got {self.delta}")
        if not (np.isfinite(self.l1) and self.l1 > 0):
            raise ConfigError(f"l1 must be finite and > 0, got {self.l1}")
        if not (np.isfinite(self.l2) and self.l2 > 0):
            raise ConfigError(f"l2 must be finite and > 0, got {self.l2}")


class ProblemInstance:
    """Deterministic objective with exact derivatives.

    Subclasses set ``dim``, ``regularity`` and ``x0`` and implement
    ``value``/``grad``/``hess``.  Batched hooks have generic fallbacks and are
    overridden where structure allows (separable or tridiagonal Hessians).
    """

    dim: int
    regularity: RegularityParams
    x0: np.ndarray
    name: str = "problem"

    def value(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def grad(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hess(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hvp(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        return self.hess(x) @ v

    def hvp_many(self, points: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Exact Hessian-vector products H(p_k) v for each row p_k."""
        return np.stack([self.hvp(p, v) for p in points])

    def grad_many(self, points: np.ndarray) -> np.ndarray:
        return np.stack([self.grad(p) for p in points])

    def value_many(self, points: np.ndarray) -> np.ndarray:
        return np.array([self.value(p) for p in points])

    def lambda_min(self, x: np.ndarray) -> float:
        return float(np.linalg.eigvalsh(self.hess(x))[0])


class QuadraticProblem(ProblemInstance):
    """F(x) = x'Ax/2 - b'x with symmetric A.

    l2 is a free declared bound (the Hessian is constant, so any positive
    value is valid); delta defaults to the exact gap when A is positive
    definite and must be supplied otherwise.
    """

    name = "quadratic"

    def __init__(self, A: np.ndarray, b: np.ndarray | None = None,
                 l2: float = 1.0, delta: float | None = None,
                 x0: np.ndarray | None = None):
        A = np.asarray(A, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ConfigError("A must be square")
        if not np.allclose(A, A.T, atol=1e-12):
            raise ConfigError("A must be symmetric")
        self.A = A
        self.dim = A.shape[0]
        self.b = np.zeros(self.dim) if b is None else np.asarray(b, dtype=np.float64)
        self.x0 = np.zeros(self.dim) if x0 is None else np.asarray(x0, dtype=np.float64)
        evals = np.linalg.eigvalsh(A)
        l1 = float(max(abs(evals[0]), abs(evals[-1])))
        if delta is None:
            if evals[0] > 1e-12:
                xstar = np.linalg.solve(A, self.b)
                delta = self.value(self.x0) - self.value(xstar)
            else:
                raise ConfigError("delta is required when A is not positive definite")
        self.regularity = RegularityParams(delta=float(delta), l1=max(l1, 1e-12), l2=l2)

    def value(self, x: np.ndarray) -> float:
        return float(0.5 * x @ (self.A @ x) - self.b @ x)

    def grad(self, x: np.ndarray) -> np.ndarray:
        return self.A @ x - self.b

    def hess(self, x: np.ndarray) -> np.ndarray:
        return self.A

    def hvp(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        return self.A @ v

    def hvp_many(self, points: np.ndarray, v: np.ndarray) -> np.ndarray:
        return np.broadcast_to(self.A @ v, (points.shape[0], self.dim)).copy()

    def grad_many(self, points: np.ndarray) -> np.ndarray:
        return points @ self.A.T - self.b

    def lambda_min(self, x: np.ndarray) -> float:
        return float(np.linalg.eigvalsh(self.A)[0])


class LambdaSumProblem(ProblemInstance):
    """Separable bump-sum F(x) = scale * sum_i 8(exp(-(x_i-c_i)^2/2) - 1).

    Bounded below by -8*scale*dim; gradient Lipschitz constant 8*scale and
    Hessian Lipschitz constant LAM_THIRD_MAX*scale, both tight.  The Hessian
    is diagonal, which makes path-integrated Hessian-vector products cheap.
    """

    name = "lambda_sum"

    def __init__(self, dim: int, offsets: np.ndarray | None = None,
                 scale: float = 1.0, x0: np.ndarray | None = None):
        if dim < 1:
            raise ConfigError("dim must be >= 1")
        if scale <= 0:
            raise ConfigError("scale must be > 0")
        self.dim = dim
        self.scale = float(scale)
        self.offsets = np.zeros(dim) if offsets is None else np.asarray(offsets, dtype=np.float64)
        if self.offsets.shape != (dim,):
            raise ConfigError("offsets must have shape (dim,)")
        self.x0 = np.zeros(dim) if x0 is None else np.asarray(x0, dtype=np.float64)
        delta = self.value(self.x0) + 8.0 * self.scale * dim
        self.regularity = RegularityParams(delta=delta, l1=8.0 * self.scale,
                                           l2=LAM_THIRD_MAX * self.scale)

    def value(self, x: np.ndarray) -> float:
        return _kernels.lamsum_value1(x, self.offsets, self.scale)

    def grad(self, x: np.ndarray) -> np.ndarray:
        return _kernels.lamsum_grad1(x, self.offsets, self.scale)

    def hess_diag(self, x: np.ndarray) -> np.ndarray:
        return _kernels.lamsum_hdiag1(x, self.offsets, self.scale)

    def hess(self, x: np.ndarray) -> np.ndarray:
        return np.diag(self.hess_diag(x))

    def hvp(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        return self.hess_diag(x) * v

    def hvp_many(self, points: np.ndarray, v: np.ndarray) -> np.ndarray:
        return _kernels.lamsum_hdiag(points, self.offsets, self.scale) * v

    def grad_many(self, points: np.ndarray) -> np.ndarray:
        return _kernels.lamsum_grad(points, self.offsets, self.scale)

    def value_many(self, points: np.ndarray) -> np.ndarray:
        return _kernels.lamsum_value(points, self.offsets, self.scale)

    def lambda_min(self, x: np.ndarray) -> float:
        return float(self.hess_diag(x).min())


def _sigmoid(t: np.ndarray) -> np.ndarray:
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


class FiniteSumProblem(ProblemInstance):
    """F(x) = mean_i f_i(x) with per-component derivatives exposed.

    The stochastic channel samples a component index, so the Hessian
    estimator is exactly the Jacobian of the gradient estimator.  Two
    component families:

    * ``quadratic``: f_i(x) = x'A_i x/2 - b_i'x
    * ``logistic``:  f_i(x) = log(1 + exp(-y_i a_i'x)) + reg/2 ||x||^2
    """

    def __init__(self, kind: str, dim: int, n_components: int,
                 spread: float = 0.5, reg: float = 0.1, seed: int = 0,
                 delta: float | None = None):
        if n_components < 2 or n_components % 2 != 0:
            raise ConfigError("n_components must be even and >= 2")
        self.kind = kind
        self.dim = dim
        self.n_components = n_components
        self.name = f"erm_{kind}"
        rng = np.random.default_rng(seed)
        self.x0 = np.zeros(dim)
        if kind == "quadratic":
            base = rng.standard_normal((dim, dim)) / np.sqrt(dim)
            A_bar = base @ base.T + np.eye(dim)
            # +/- spread * I in balanced pairs: component-Hessian deviation has
            # operator norm exactly `spread` and zero mean.
            signs = np.tile([1.0, -1.0], n_components // 2)
            self.A = np.stack([A_bar + s * spread * np.eye(dim) for s in signs])
            self.bvec = rng.standard_normal((n_components, dim))
            self.bvec -= self.bvec.mean(axis=0)
            self.A_bar = A_bar
            self.b_bar = np.zeros(dim)
            self.spread = spread
            evals = np.linalg.eigvalsh(A_bar)
            l1 = float(max(abs(evals[0]), abs(evals[-1])) + spread)
            if delta is None:
                xstar = np.linalg.solve(A_bar, self.b_bar)
                delta = self.value(self.x0) - self.value(xstar)
            self.regularity = RegularityParams(delta=float(delta), l1=l1, l2=1.0)
        elif kind == "logistic":
            self.features = rng.standard_normal((n_components, dim))
            self.labels = np.where(rng.random(n_components) < 0.5, -1.0, 1.0)
            self.reg = reg
            norms = np.linalg.norm(self.features, axis=1)
            l1 = float(0.25 * (norms**2).max() + reg)
            # |sigmoid''| <= 1/(6 sqrt 3), so the component Hessian has
            # Lipschitz constant at most max ||a_i||^3 / (6 sqrt 3).
            l2 = float((norms**3).max() / (6.0 * np.sqrt(3.0)))
            if delta is None:
                delta = self.value(self.x0)  # F >= 0 for the regularized logistic loss
            self.regularity = RegularityParams(delta=float(delta), l1=l1, l2=max(l2, 1e-12))
        else:
            raise ConfigError(f"unknown finite-sum kind {kind!r}")

    def component_grad(self, x: np.ndarray, idx: int) -> np.ndarray:
        if self.kind == "quadratic":
            return self.A[idx] @ x - self.bvec[idx]
        a, y = self.features[idx], self.labels[idx]
        s = float(_sigmoid(np.array([-y * (a @ x)]))[0])
        return -y * s * a + self.reg * x

    def component_hess(self, x: np.ndarray, idx: int) -> np.ndarray:
        if self.kind == "quadratic":
            return self.A[idx]
        a, y = self.features[idx], self.labels[idx]
        s = float(_sigmoid(np.array([-y * (a @ x)]))[0])
        return s * (1.0 - s) * np.outer(a, a) + self.reg * np.eye(self.dim)

    def value(self, x: np.ndarray) -> float:
        if self.kind == "quadratic":
            quad = 0.5 * np.einsum("i,kij,j->k", x, self.A, x)
            return float((quad - self.bvec @ x).mean())
        margins = -self.labels * (self.features @ x)
        return float(np.logaddexp(0.0, margins).mean() + 0.5 * self.reg * (x @ x))

    def grad(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "quadratic":
            return self.A_bar @ x - self.bvec.mean(axis=0)
        s = _sigmoid(-self.labels * (self.features @ x))
        return (-self.labels * s) @ self.features / self.n_components + self.reg * x

    def hess(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "quadratic":
            return self.A_bar
        s = _sigmoid(-self.labels * (self.features @ x))
        w = s * (1.0 - s)
        return (self.features.T * w) @ self.features / self.n_components \
            + self.reg * np.eye(self.dim)


class TridiagonalHessianMixin:
    """lambda_min via the symmetric tridiagonal eigensolver."""

    def hess_bands(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def lambda_min(self, x: np.ndarray) -> float:
        diag, off = self.hess_bands(x)
        if off.size == 0:
            return float(diag.min())
        vals = eigh_tridiagonal(diag, off, select="i", select_range=(0, 0),
                                eigvals_only=True)
        return float(vals[0])
