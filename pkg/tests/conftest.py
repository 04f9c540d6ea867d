import numpy as np
import pytest

from sosplab.core.oracle import NoiseParams
from sosplab.core.problems import LambdaSumProblem


@pytest.fixture
def small_lambda():
    """Separable test objective with random offsets and a non-stationary x0."""
    rng = np.random.default_rng(42)
    return LambdaSumProblem(dim=6, offsets=rng.uniform(-0.5, 0.5, 6),
                            scale=0.5, x0=rng.uniform(-0.8, 0.8, 6))


@pytest.fixture
def unit_noise():
    return NoiseParams(sigma1=1.0, sigma2=1.0)
