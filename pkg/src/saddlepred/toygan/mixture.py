from dataclasses import dataclass
from typing import Tuple

import numpy as np


@dataclass(frozen=True)
class MixtureSpec:
    """Isotropic Gaussian modes with means equally spaced on a circle."""

    n_modes: int = 8
    radius: float = 1.0
    sigma: float = 0.01
    center: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.n_modes < 1:
            raise ValueError("n_modes must be positive")
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")

    @property
    def means(self) -> np.ndarray:
        """``(n_modes, 2)`` array of mode centers."""
        angle = 2 * np.pi * np.arange(self.n_modes) / self.n_modes
        return np.asarray(self.center) + self.radius * np.column_stack([np.cos(angle), np.sin(angle)])


def sample_mixture(spec: MixtureSpec, n: int, rng: np.random.Generator, return_labels=False):
    """Draw ``n`` points as an ``(n, 2)`` array; modes are picked uniformly."""
    if n < 1:
        raise ValueError("n must be >= 1")
    labels = rng.integers(0, spec.n_modes, size=n)
    X = spec.means[labels] + spec.sigma * rng.standard_normal((n, 2))
    return (X, labels) if return_labels else X
