"""Oracle model, query accounting, and test problems."""

from .oracle import (
    FiniteSumOracle,
    MssReport,
    NoiseParams,
    OracleAnswer,
    QueryLedger,
    SignRadialOracle,
    StochasticOracle,
    finite_diff_hvp,
    verify_mss_equivalence,
)
from .problems import (
    LAM_THIRD_MAX,
    FiniteSumProblem,
    LambdaSumProblem,
    ProblemInstance,
    QuadraticProblem,
    RegularityParams,
    TridiagonalHessianMixin,
)

__all__ = [
    "FiniteSumOracle",
    "FiniteSumProblem",
    "LAM_THIRD_MAX",
    "LambdaSumProblem",
    "MssReport",
    "NoiseParams",
    "OracleAnswer",
    "ProblemInstance",
    "QuadraticProblem",
    "QueryLedger",
    "RegularityParams",
    "SignRadialOracle",
    "StochasticOracle",
    "TridiagonalHessianMixin",
    "finite_diff_hvp",
    "verify_mss_equivalence",
]
