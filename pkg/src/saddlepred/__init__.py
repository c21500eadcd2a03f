"""Alternating gradient methods with a prediction step for saddle-point problems."""
__version__ = "0.1.0"

from .problems import (GapUnavailableError, NoisyGradientConfig, SaddleProblem, dual_lipschitz,
                       finite_diff_check, make_bilinear, make_regularized, make_rng,
                       primal_dual_gap, spawn_rngs, with_noise)
from .optim import SaddlePointSolver, run

__all__ = [
    "__version__", "GapUnavailableError", "NoisyGradientConfig", "SaddleProblem",
    "dual_lipschitz", "finite_diff_check", "make_bilinear", "make_regularized", "make_rng",
    "primal_dual_gap", "spawn_rngs", "with_noise", "SaddlePointSolver", "run",
]
