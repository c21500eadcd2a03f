"""Saddle-point problem definitions.

A :class:`SaddleProblem` bundles a loss ``L(u, v)`` that is minimized over
``u`` and maximized over ``v`` together with its partial gradients. Problems
are immutable; stochastic gradients draw from a caller-owned
:class:`numpy.random.Generator` so that every gradient stream is reproducible
from its seed.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional, Tuple

import numpy as np

from ._validation import as_matrix, as_vector

Vector = np.ndarray
GradFn = Callable[[Vector, Vector], Vector]
StochasticGradFn = Callable[[Vector, Vector, np.random.Generator], Vector]


class GapUnavailableError(ValueError):
    """Raised when a primal-dual gap is requested for a problem without a known saddle."""


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator seeded through :class:`numpy.random.SeedSequence`.

    Seeds are taken modulo 2**64 so any unsigned 64-bit integer is accepted.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed) % 2**64)))


def spawn_rngs(seed: int, n: int) -> list:
    """``n`` statistically independent child generators of one root seed."""
    children = np.random.SeedSequence(int(seed) % 2**64).spawn(n)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


@dataclass(frozen=True)
class NoisyGradientConfig:
    """Additive i.i.d. Gaussian gradient noise with per-coordinate std ``noise_std``."""

    noise_std: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not np.isfinite(self.noise_std) or self.noise_std < 0:
            raise ValueError(f"noise_std must be finite and >= 0, got {self.noise_std}")
        if int(self.seed) < 0 or int(self.seed) >= 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def rng(self) -> np.random.Generator:
        """A fresh gradient-noise stream; equal seeds give equal streams."""
        return make_rng(self.seed)


@dataclass(frozen=True)
class SaddleProblem:
    """``min_u max_v loss(u, v)`` with exact and (optionally) stochastic gradients.

    ``stochastic_grad_u`` / ``stochastic_grad_v`` take an extra generator
    argument. When they are ``None`` the exact gradients are used.
    ``saddle`` is the known solution ``(u*, v*)`` if there is one.
    """

    dim_u: int
    dim_v: int
    loss: Callable[[Vector, Vector], float]
    grad_u: GradFn
    grad_v: GradFn
    stochastic_grad_u: Optional[StochasticGradFn] = None
    stochastic_grad_v: Optional[StochasticGradFn] = None
    saddle: Optional[Tuple[Vector, Vector]] = None
    noise: Optional[NoisyGradientConfig] = None
    name: str = "saddle"

    def __post_init__(self):
        if self.dim_u < 1 or self.dim_v < 1:
            raise ValueError("dim_u and dim_v must be positive")

    def sample_grad_u(self, u, v, rng=None) -> Vector:
        if self.stochastic_grad_u is None or rng is None:
            return self.grad_u(u, v)
        return self.stochastic_grad_u(u, v, rng)

    def sample_grad_v(self, u, v, rng=None) -> Vector:
        if self.stochastic_grad_v is None or rng is None:
            return self.grad_v(u, v)
        return self.stochastic_grad_v(u, v, rng)

    def gradient_rng(self) -> Optional[np.random.Generator]:
        """Fresh noise stream for this problem, or ``None`` if it is noiseless."""
        return None if self.noise is None else self.noise.rng()


def make_bilinear(K) -> SaddleProblem:
    """The bilinear saddle ``L(u, v) = v^T K u`` with saddle at the origin."""
    K = as_matrix(K).copy()
    K.setflags(write=False)
    dim_v, dim_u = K.shape
    KT = K.T

    return SaddleProblem(
        dim_u=dim_u,
        dim_v=dim_v,
        loss=lambda u, v: float(v @ (K @ u)),
        grad_u=lambda u, v: KT @ v,
        grad_v=lambda u, v: K @ u,
        saddle=(np.zeros(dim_u), np.zeros(dim_v)),
        name="bilinear",
    )


def make_regularized(K, mu: float) -> SaddleProblem:
    """``(mu/2)|u|^2 + v^T K u - (mu/2)|v|^2``; convex-concave for ``mu >= 0``.

    Negative ``mu`` is accepted on purpose: it breaks convexity and is used as a
    negative control by the lemma checks.
    """
    K = as_matrix(K).copy()
    K.setflags(write=False)
    if not np.isfinite(mu):
        raise ValueError("mu must be finite")
    mu = float(mu)
    dim_v, dim_u = K.shape
    KT = K.T

    return SaddleProblem(
        dim_u=dim_u,
        dim_v=dim_v,
        loss=lambda u, v: float(0.5 * mu * (u @ u) + v @ (K @ u) - 0.5 * mu * (v @ v)),
        grad_u=lambda u, v: mu * u + KT @ v,
        grad_v=lambda u, v: K @ u - mu * v,
        saddle=(np.zeros(dim_u), np.zeros(dim_v)),
        name="regularized",
    )


def dual_lipschitz(K) -> float:
    """Lipschitz constant of ``grad_v`` in ``u`` for the bilinear families: ``||K||_2``."""
    return float(np.linalg.norm(as_matrix(K), 2))


def with_noise(problem: SaddleProblem, cfg: NoisyGradientConfig) -> SaddleProblem:
    """Copy of ``problem`` whose stochastic gradients add Gaussian noise.

    The loss and the exact gradients are untouched. With ``noise_std == 0``
    the stochastic gradients return the exact ones without drawing.
    """
    if not isinstance(cfg, NoisyGradientConfig):
        raise TypeError("cfg must be a NoisyGradientConfig")
    std = float(cfg.noise_std)
    gu, gv = problem.grad_u, problem.grad_v

    if std == 0.0:
        return replace(problem, stochastic_grad_u=None, stochastic_grad_v=None, noise=cfg)

    def noisy_u(u, v, rng):
        return gu(u, v) + std * rng.standard_normal(problem.dim_u)

    def noisy_v(u, v, rng):
        return gv(u, v) + std * rng.standard_normal(problem.dim_v)

    return replace(problem, stochastic_grad_u=noisy_u, stochastic_grad_v=noisy_v, noise=cfg)


def primal_dual_gap(problem: SaddleProblem, u, v) -> float:
    """``L(u, v*) - L(u*, v)``; nonnegative for convex-concave losses."""
    if problem.saddle is None:
        raise GapUnavailableError(f"gap unavailable: problem {problem.name!r} has no known saddle")
    u_star, v_star = problem.saddle
    return problem.loss(u, v_star) - problem.loss(u_star, v)


def finite_diff_check(problem: SaddleProblem, u, v, h: float = 1e-5,
                      max_coords: Optional[int] = None, seed: int = 0) -> Tuple[float, float]:
    """Max relative error of the exact gradients against central differences.

    The error for each block is ``max|g - g_fd| / max(||g||, 1)``. For large
    parameter vectors ``max_coords`` restricts the comparison to a seeded
    random subset of coordinates per block.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    u = as_vector(u, "u", problem.dim_u)
    v = as_vector(v, "v", problem.dim_v)

    rng = make_rng(seed)

    def pick(n):
        if max_coords is None or max_coords >= n:
            return np.arange(n)
        return np.sort(rng.choice(n, size=max_coords, replace=False))

    def block_error(f, x, g):
        g = np.asarray(g, dtype=np.float64)
        idx = pick(x.size)
        fd = np.empty(idx.size)
        for j, i in enumerate(idx):
            xp = x.copy()
            xm = x.copy()
            xp[i] += h
            xm[i] -= h
            fd[j] = (f(xp) - f(xm)) / (2 * h)
        return float(np.max(np.abs(g[idx] - fd)) / max(np.linalg.norm(g), 1.0))

    err_u = block_error(lambda w: problem.loss(w, v), u, problem.grad_u(u, v))
    err_v = block_error(lambda w: problem.loss(u, w), v, problem.grad_v(u, v))
    return err_u, err_v
