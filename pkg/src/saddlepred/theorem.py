"""Empirical checks of the averaged-iterate convergence bound for predictive SGD.

On a convex-concave problem with known saddle, stochastic predictive SGD with
step sizes ``C_alpha / sqrt(k)`` and ``C_beta / sqrt(k)`` is run over several
seeds. The mean primal-dual gap of the running averages is compared with the
closed-form upper bound evaluated at empirically measured constants, and the
per-step primal/dual contraction inequalities are checked on exact-gradient
runs.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .optim import Schedule, SGD, run
from .problems import NoisyGradientConfig, SaddleProblem, dual_lipschitz, with_noise


@dataclass(frozen=True)
class BoundConstants:
    G_u: float = 0.0
    G_v: float = 0.0
    D_u: float = 0.0
    D_v: float = 0.0
    L_v: float = 0.0
    C_alpha: float = 1.0
    C_beta: float = 1.0

    def __post_init__(self):
        for name in ("G_u", "G_v", "D_u", "D_v", "L_v"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if not (self.C_alpha > 0 and self.C_beta > 0):
            raise ValueError("C_alpha and C_beta must be positive")

    def inflated(self, factor: float) -> "BoundConstants":
        """Scale the sampled quantities ``G`` and ``D`` by ``factor``."""
        return BoundConstants(self.G_u * factor, self.G_v * factor, self.D_u * factor,
                              self.D_v * factor, self.L_v, self.C_alpha, self.C_beta)


def evaluate_bound(c: BoundConstants, l) -> np.ndarray:
    """Right-hand side of the averaged-gap bound at iteration count(s) ``l``."""
    l = np.asarray(l, dtype=np.float64)
    if np.any(l < 1):
        raise ValueError("l must be >= 1")
    first = (c.D_u ** 2 / c.C_alpha + c.D_v ** 2 / c.C_beta) / (2.0 * np.sqrt(l))
    second = (np.sqrt(l + 1.0) / l) * (
        c.C_alpha * c.G_u ** 2 / 2.0
        + c.C_alpha * c.L_v * c.G_u ** 2
        + c.C_alpha * c.L_v * c.D_v ** 2
        + c.C_beta * c.G_v ** 2 / 2.0
    )
    out = first + second
    return float(out) if out.ndim == 0 else out


@dataclass
class RateFit:
    """Gap curves on a log-spaced grid and the log-log slope fit.

    ``slope`` / ``intercept`` fit ``log mean_gap`` against ``log l`` over
    ``window``; ``seed_slopes`` are the same fit per seed. ``last_slope``
    fits the mean gap of the raw (non-averaged) iterates for comparison.
    ``fitted`` is False when the window holds fewer than two grid points.
    """

    l: np.ndarray
    curves: np.ndarray
    mean_gap: np.ndarray
    last_curves: np.ndarray
    seeds: List[int]
    window: tuple
    slope: float = float("nan")
    intercept: float = float("nan")
    seed_slopes: np.ndarray = field(default_factory=lambda: np.zeros(0))
    last_slope: float = float("nan")
    fitted: bool = False
    collapsed_seeds: List[int] = field(default_factory=list)
    constants: Optional[BoundConstants] = None

    @property
    def slope_mean(self):
        return float(np.mean(self.seed_slopes)) if self.seed_slopes.size else float("nan")

    @property
    def slope_std(self):
        return float(np.std(self.seed_slopes, ddof=1)) if self.seed_slopes.size > 1 else float("nan")

    @property
    def n_seeds(self):
        return len(self.seeds)


def log_grid(n_steps, n_points=60):
    return np.unique(np.round(np.logspace(0, math.log10(n_steps), n_points)).astype(int))


def _fit(l, y):
    slope, intercept = np.polyfit(np.log(l), np.log(y), 1)
    return float(slope), float(intercept)


def estimate_constants(trajectories, init, L_v, C_alpha, C_beta, inflation=1.1) -> BoundConstants:
    """Empirical ``G`` and ``D`` from per-seed trajectories, then inflated.

    ``G_u^2`` is the largest (over steps) seed-mean squared stochastic gradient
    norm; ``D_u^2`` the largest seed-mean squared distance to the saddle,
    including the initial point ``init = (dist_u0, dist_v0)``.
    """
    gsq_u = np.mean([t.column("gsq_u") for t in trajectories], axis=0)
    gsq_v = np.mean([t.column("gsq_v") for t in trajectories], axis=0)
    dsq_u = np.mean([t.column("dist_u") ** 2 for t in trajectories], axis=0)
    dsq_v = np.mean([t.column("dist_v") ** 2 for t in trajectories], axis=0)
    d0u, d0v = init
    raw = BoundConstants(
        G_u=math.sqrt(gsq_u.max()), G_v=math.sqrt(gsq_v.max()),
        D_u=math.sqrt(max(dsq_u.max(), d0u ** 2)), D_v=math.sqrt(max(dsq_v.max(), d0v ** 2)),
        L_v=L_v, C_alpha=C_alpha, C_beta=C_beta,
    )
    return raw.inflated(inflation)


def measure_rate(problem: SaddleProblem, noise_std: float, C_alpha: float, C_beta: float,
                 n_steps: int, seeds: Sequence[int], *, init=None, L_v=None,
                 window=(100, None), n_points=60, inflation=1.1, K=None) -> RateFit:
    """Run predictive SGD per seed and fit the decay of the mean averaged gap.

    ``L_v`` defaults to ``||K||_2`` when ``K`` is given. Seeds whose run
    collapses are reported in ``collapsed_seeds`` and left out of the fit.
    """
    if problem.saddle is None:
        raise ValueError("measure_rate needs a problem with a known saddle")
    if init is None:
        init = (np.ones(problem.dim_u), np.ones(problem.dim_v))
    u0, v0 = (np.asarray(x, dtype=np.float64) for x in init)
    if L_v is None:
        L_v = dual_lipschitz(K) if K is not None else 0.0
    lo, hi = window
    hi = n_steps if hi is None else hi

    grid = log_grid(n_steps, n_points)
    schedules = (Schedule("inverse_sqrt", C_alpha), Schedule("inverse_sqrt", C_beta))
    curves, last, kept, collapsed, trajs = [], [], [], [], []
    for seed in seeds:
        noisy = with_noise(problem, NoisyGradientConfig(noise_std, seed))
        rec = run(noisy, (u0, v0), method="predict", updaters=(SGD(), SGD()),
                  schedules=schedules, n_steps=n_steps, record_every=1)
        if rec.collapsed:
            warnings.warn(f"seed {seed} collapsed at step {rec.collapse_step}; excluded from fit")
            collapsed.append(seed)
            continue
        kept.append(seed)
        trajs.append(rec)
        curves.append(rec.column("gap_avg")[grid - 1])
        last.append(rec.column("gap")[grid - 1])

    curves = np.array(curves).reshape(len(kept), grid.size)
    last = np.array(last).reshape(len(kept), grid.size)
    mean_gap = curves.mean(axis=0) if kept else np.full(grid.size, np.nan)
    fit = RateFit(l=grid, curves=curves, mean_gap=mean_gap, last_curves=last, seeds=kept,
                  window=(lo, hi), collapsed_seeds=collapsed)
    if trajs:
        fit.constants = estimate_constants(
            trajs, (np.linalg.norm(u0 - problem.saddle[0]), np.linalg.norm(v0 - problem.saddle[1])),
            L_v, C_alpha, C_beta, inflation)

    mask = (grid >= lo) & (grid <= hi)
    if kept and mask.sum() >= 2:
        fit.slope, fit.intercept = _fit(grid[mask], mean_gap[mask])
        fit.seed_slopes = np.array([_fit(grid[mask], c[mask])[0] for c in curves])
        fit.last_slope = _fit(grid[mask], last.mean(axis=0)[mask])[0]
        fit.fitted = True
    return fit


@dataclass
class BoundCheck:
    l: np.ndarray
    measured: np.ndarray
    bound: np.ndarray
    holds: np.ndarray

    @property
    def violations(self):
        return self.l[~self.holds]

    @property
    def all_hold(self):
        return bool(self.holds.all())


def check_bound_holds(constants: BoundConstants, l, mean_gap) -> BoundCheck:
    """Compare the measured mean gap with the bound at every recorded ``l``."""
    l = np.asarray(l)
    mean_gap = np.asarray(mean_gap, dtype=np.float64)
    bound = np.asarray(evaluate_bound(constants, l), dtype=np.float64).reshape(l.shape)
    return BoundCheck(l, mean_gap, bound, mean_gap <= bound)


def lemma_residuals(problem: SaddleProblem, u_hist, v_hist, alphas, betas, which: str,
                    L_v: float) -> np.ndarray:
    """Per-step ``LHS - RHS`` of the primal (``lemma1``) or dual (``lemma2``) inequality.

    Deterministic instantiation: ``G_u^2`` becomes ``||g_u(u_k, v_k)||^2``,
    ``G_v^2`` becomes ``||g_v(ubar_{k+1}, v_k)||^2`` and ``D_v^2`` becomes
    ``||v_k - v*||^2``. ``u_hist`` / ``v_hist`` include the initial point, so
    they are one longer than ``alphas``.
    """
    if problem.saddle is None:
        raise ValueError("lemma checks need a known saddle")
    u_star, v_star = problem.saddle
    n = len(alphas)
    if len(u_hist) != n + 1 or len(v_hist) != n + 1 or len(betas) != n:
        raise ValueError("need n + 1 iterates for n step sizes")
    L = problem.loss
    res = np.empty(n)
    for k in range(n):
        u, v, u_next, v_next = u_hist[k], v_hist[k], u_hist[k + 1], v_hist[k + 1]
        a, b = alphas[k], betas[k]
        g_u = problem.grad_u(u, v)
        du, du_next = np.sum((u - u_star) ** 2), np.sum((u_next - u_star) ** 2)
        dv, dv_next = np.sum((v - v_star) ** 2), np.sum((v_next - v_star) ** 2)
        if which == "lemma1":
            lhs = L(u, v) - L(u_star, v)
            rhs = (du - du_next) / (2 * a) + 0.5 * a * float(g_u @ g_u)
        elif which == "lemma2":
            g_v = problem.grad_v(2 * u_next - u, v)
            lhs = L(u, v_star) - L(u, v)
            rhs = ((dv - dv_next) / (2 * b) + 0.5 * b * float(g_v @ g_v)
                   + a * L_v * (float(g_u @ g_u) + dv))
        else:
            raise ValueError("which must be 'lemma1' or 'lemma2'")
        res[k] = lhs - rhs
    return res


def lemma_contraction_check(problem: SaddleProblem, trajectory, which: str, L_v: float) -> np.ndarray:
    """Lemma residuals from a run recorded with ``store_iterates=True`` and ``record_every=1``."""
    if not trajectory.store_iterates:
        raise ValueError("trajectory must store its iterates")
    n = len(trajectory.u_hist) - 1
    alphas = trajectory.column("alpha")
    betas = trajectory.column("beta")
    if alphas.size != n:
        raise ValueError("trajectory must be recorded at every step")
    return lemma_residuals(problem, trajectory.u_hist, trajectory.v_hist, alphas, betas, which, L_v)


def deterministic_lemma_run(problem: SaddleProblem, C_alpha=0.5, C_beta=0.5, n_steps=1000,
                            init=None):
    """Exact-gradient predictive run with stored iterates, ready for the lemma checks.

    ``problem`` should be noiseless; a noisy problem would use its own stream.
    """
    if init is None:
        init = (np.ones(problem.dim_u), np.ones(problem.dim_v))
    rec = run(problem, init, method="predict",
              schedules=(Schedule("inverse_sqrt", C_alpha), Schedule("inverse_sqrt", C_beta)),
              n_steps=n_steps, record_every=1, rng=None, store_iterates=True)
    return rec
