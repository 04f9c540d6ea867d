"""Inner solvers: cubic-regularized steps and negative-curvature search."""

from .cubic import CubicModel, CubicStep, brute_force_value, model_value, solve_cubic_tr
from .curvature import OjaOutcome, curvature_step, exact_curvature_direction, oja_search

__all__ = [
    "CubicModel",
    "CubicStep",
    "OjaOutcome",
    "brute_force_value",
    "curvature_step",
    "exact_curvature_direction",
    "model_value",
    "oja_search",
    "solve_cubic_tr",
]
