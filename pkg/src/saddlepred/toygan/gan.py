"""Toy GAN on a Gaussian mixture, exposed as a saddle problem.

The generator parameters are the primal (minimized) variable and the
discriminator parameters the dual (maximized) one. The objective on a batch
is

    mean log D(x_real) + mean log(1 - D(G(z)))

with ``D`` clamped to ``[eps, 1 - eps]`` so that every value stays finite.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .._validation import as_points
from ..optim import Adam, Schedule, TrajectoryRecord, run
from ..problems import SaddleProblem, make_rng, spawn_rngs
from .mixture import MixtureSpec, sample_mixture
from .mlp import Mlp, discriminator_net, generator_net

OBJECTIVES = ("saturating", "non_saturating")
CLAMP = 1e-7


@dataclass
class GanProblem:
    generator: Mlp = field(default_factory=generator_net)
    discriminator: Mlp = field(default_factory=discriminator_net)
    batch_size: int = 512
    objective: str = "saturating"
    clamp: float = CLAMP
    latent_dim: int = 2

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if self.generator.n_in != self.latent_dim or self.generator.n_out != self.discriminator.n_in:
            raise ValueError("generator and discriminator dimensions do not line up")

    def _disc(self, theta_d, x):
        raw, cache = self.discriminator.forward(theta_d, x)
        raw = raw[:, 0]
        d = np.clip(raw, self.clamp, 1.0 - self.clamp)
        inside = ((raw > self.clamp) & (raw < 1.0 - self.clamp)).astype(np.float64)
        return d, inside, cache

    def objective_value(self, theta_g, theta_d, x_real, z) -> float:
        d_real, _, _ = self._disc(theta_d, x_real)
        d_fake, _, _ = self._disc(theta_d, self.generator(theta_g, z))
        return float(np.mean(np.log(d_real)) + np.mean(np.log1p(-d_fake)))

    def grad_generator(self, theta_g, theta_d, z):
        """Descent direction for the generator on latent batch ``z``."""
        fake, g_cache = self.generator.forward(theta_g, z)
        d_fake, inside, d_cache = self._disc(theta_d, fake)
        n = z.shape[0]
        if self.objective == "saturating":
            # d/dD log(1 - D)
            dout = -inside / (1.0 - d_fake) / n
        else:
            # descend -log D
            dout = -inside / d_fake / n
        _, dx = self.discriminator.backward(theta_d, d_cache, dout[:, None])
        grad_g, _ = self.generator.backward(theta_g, g_cache, dx)
        return grad_g

    def grad_discriminator(self, theta_g, theta_d, x_real, z):
        """Ascent direction of the batch objective for the discriminator."""
        fake = self.generator(theta_g, z)
        d_real, in_real, c_real = self._disc(theta_d, x_real)
        d_fake, in_fake, c_fake = self._disc(theta_d, fake)
        g_real, _ = self.discriminator.backward(
            theta_d, c_real, (in_real / d_real / x_real.shape[0])[:, None])
        g_fake, _ = self.discriminator.backward(
            theta_d, c_fake, (-in_fake / (1.0 - d_fake) / z.shape[0])[:, None])
        return g_real + g_fake

    def sample_latent(self, n, rng):
        return rng.standard_normal((n, self.latent_dim))

    def init_params(self, rng):
        return self.generator.init_params(rng), self.discriminator.init_params(rng)

    def as_saddle_problem(self, real_sampler: Callable, x_eval, z_eval) -> SaddleProblem:
        """Saddle view: exact quantities on the fixed ``(x_eval, z_eval)`` batches,
        stochastic gradients on fresh batches of ``batch_size``.

        ``real_sampler(n, rng)`` must return an ``(n, 2)`` array of data points.
        """
        B = self.batch_size

        def stoch_u(u, v, rng):
            return self.grad_generator(u, v, self.sample_latent(B, rng))

        def stoch_v(u, v, rng):
            x = real_sampler(B, rng)
            return self.grad_discriminator(u, v, x, self.sample_latent(B, rng))

        return SaddleProblem(
            dim_u=self.generator.n_params,
            dim_v=self.discriminator.n_params,
            loss=lambda u, v: self.objective_value(u, v, x_eval, z_eval),
            grad_u=lambda u, v: self.grad_generator(u, v, z_eval),
            grad_v=lambda u, v: self.grad_discriminator(u, v, x_eval, z_eval),
            stochastic_grad_u=stoch_u,
            stochastic_grad_v=stoch_v,
            name="toygan",
        )


def gan_gradients(problem: GanProblem, theta_g, theta_d, batch_real, batch_z):
    """``(grad_g, grad_d)`` at one point: descent for G, ascent for D."""
    return (problem.grad_generator(theta_g, theta_d, batch_z),
            problem.grad_discriminator(theta_g, theta_d, batch_real, batch_z))


@dataclass
class ModeCoverage:
    covered: int
    counts: np.ndarray
    mean_dist: np.ndarray
    covered_modes: np.ndarray
    threshold_sigmas: float
    min_fraction: float


def mode_coverage(samples, spec: MixtureSpec, threshold_sigmas=3.0, min_fraction=0.2) -> ModeCoverage:
    """Count modes that receive enough samples lying close to their mean.

    Each sample goes to its nearest mode. Mode ``j`` counts as covered when it
    holds at least ``min_fraction / n_modes`` of the samples and its samples
    sit on average within ``threshold_sigmas * sigma`` of its mean.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2 or samples.shape[0] < 1:
        raise ValueError("samples must be a nonempty (n, 2) array")
    means = spec.means
    d2 = ((samples[:, None, :] - means[None, :, :]) ** 2).sum(axis=2)
    nearest = np.argmin(d2, axis=1)
    dist = np.sqrt(d2[np.arange(samples.shape[0]), nearest])
    counts = np.bincount(nearest, minlength=spec.n_modes)
    sums = np.bincount(nearest, weights=dist, minlength=spec.n_modes)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean_dist = np.where(counts > 0, sums / np.maximum(counts, 1), np.inf)
    n = samples.shape[0]
    ok = (counts / n >= min_fraction / spec.n_modes) & (mean_dist <= threshold_sigmas * spec.sigma)
    return ModeCoverage(int(ok.sum()), counts, mean_dist, np.flatnonzero(ok),
                        threshold_sigmas, min_fraction)


@dataclass
class GanRun:
    trajectory: TrajectoryRecord
    coverage: List[tuple]          # (step, ModeCoverage)
    samples: List[tuple]           # (step, (n, 2) generator samples on the probe)
    theta_g: np.ndarray
    theta_d: np.ndarray

    @property
    def collapsed(self):
        return self.trajectory.collapsed

    @property
    def final_coverage(self) -> ModeCoverage:
        return self.coverage[-1][1]


def train_gan(spec: MixtureSpec, method="predict", batch_size=512, n_steps=5000, seed=0, *,
              learning_rate=1e-3, beta1=0.9, beta2=0.999, epsilon=1e-8, hidden=128,
              objective="saturating", eval_every=500, probe_size=10_000, keep_samples=True,
              threshold_sigmas=3.0, min_fraction=0.2, real_sampler=None,
              predict_dual=False) -> GanRun:
    """Train a toy GAN with alternating Adam steps, G as the predicted variable.

    Coverage is measured on a fixed probe of ``probe_size`` latent draws at
    step 0, every ``eval_every`` steps, and at the end.
    """
    gan = GanProblem(generator_net(hidden), discriminator_net(hidden), batch_size, objective)
    init_rng, train_rng, probe_rng = spawn_rngs(seed, 3)
    if real_sampler is None:
        def real_sampler(n, rng):
            return sample_mixture(spec, n, rng)
    theta_g, theta_d = gan.init_params(init_rng)
    x_eval = real_sampler(batch_size, probe_rng)
    z_eval = gan.sample_latent(batch_size, probe_rng)
    z_probe = gan.sample_latent(probe_size, probe_rng)
    problem = gan.as_saddle_problem(real_sampler, x_eval, z_eval)

    coverage, samples = [], []

    def evaluate(step, tg):
        pts = gan.generator(tg, z_probe)
        coverage.append((step, mode_coverage(pts, spec, threshold_sigmas, min_fraction)))
        if keep_samples:
            samples.append((step, pts))

    evaluate(0, theta_g)
    if n_steps == 0:
        rec = TrajectoryRecord(gan.generator.n_params, gan.discriminator.n_params)
        return GanRun(rec, coverage, samples, theta_g, theta_d)

    def callback(state, rec):
        evaluate(state.k, state.u)

    adam = Adam(beta1, beta2, epsilon)
    lr = Schedule("constant", learning_rate)
    rec = run(problem, (theta_g, theta_d), method=method, updaters=(adam, adam),
              schedules=(lr, lr), n_steps=n_steps, record_every=eval_every, rng=train_rng,
              predict_dual=predict_dual, callback=callback)
    final = rec.final_state
    if rec.collapsed and (not coverage or coverage[-1][0] != final.k):
        evaluate(final.k, final.u)
    return GanRun(rec, coverage, samples, final.u, final.v)


class MixtureGAN(BaseEstimator):
    """Estimator front end: fit a toy GAN to 2-D points ``X`` by resampling them.

    ``fit`` draws training batches from ``X`` with replacement; ``sample``
    pushes fresh latent draws through the fitted generator.
    """

    def __init__(self, method="predict", n_steps=2000, batch_size=512, learning_rate=1e-3,
                 beta1=0.9, beta2=0.999, hidden=128, objective="saturating",
                 random_state=0):
        self.method = method
        self.n_steps = n_steps
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.hidden = hidden
        self.objective = objective
        self.random_state = random_state

    def fit(self, X, y=None):
        X = as_points(X)

        def resample(n, rng):
            return X[rng.integers(0, X.shape[0], size=n)]

        seed = 0 if self.random_state is None else int(self.random_state)
        res = train_gan(MixtureSpec(), self.method, self.batch_size, self.n_steps, seed,
                        learning_rate=self.learning_rate, beta1=self.beta1, beta2=self.beta2,
                        hidden=self.hidden, objective=self.objective,
                        eval_every=max(self.n_steps, 1), probe_size=1, keep_samples=False,
                        real_sampler=resample)
        self.generator_ = generator_net(self.hidden)
        self.theta_g_, self.theta_d_ = res.theta_g, res.theta_d
        self.trajectory_ = res.trajectory
        self.collapsed_ = res.collapsed
        self.n_iter_ = res.trajectory.final_state.k if res.trajectory.final_state else 0
        return self

    def sample(self, n, random_state=None):
        check_is_fitted(self, "theta_g_")
        rng = make_rng(0 if random_state is None else random_state)
        return self.generator_(self.theta_g_, rng.standard_normal((n, self.generator_.n_in)))
