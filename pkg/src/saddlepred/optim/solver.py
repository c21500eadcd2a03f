"""Alternating gradient descent/ascent with and without the prediction step.

One plain step descends in ``u`` from ``(u_k, v_k)`` and then ascends in ``v``
from ``(u_{k+1}, v_k)``. The prediction variant evaluates the ascent gradient
at the extrapolated point ``2 u_{k+1} - u_k`` instead; the extrapolated point
is never stored as an iterate.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional

import numpy as np

from ..problems import SaddleProblem
from .._validation import as_vector
from .schedules import Schedule
from .updaters import SGD, Updater

METHODS = ("plain", "predict")


class DivergenceError(FloatingPointError):
    """A gradient or iterate became non-finite at step ``step``."""

    def __init__(self, step, what="gradient"):
        super().__init__(f"divergence detected at step {step}: non-finite {what}")
        self.step = step
        self.what = what


@dataclass
class SolverState:
    """Iterates after ``k`` completed steps.

    ``u_prev`` / ``v_prev`` are the iterates from before the most recent
    update (equal to the initial point on a cold start). ``grad_u`` and
    ``grad_v`` are the gradients the last step used, ``rate_u`` / ``rate_v``
    its step sizes.
    """

    u: np.ndarray
    v: np.ndarray
    u_prev: np.ndarray
    v_prev: np.ndarray
    k: int = 0
    updater_u: Updater = field(default_factory=SGD)
    updater_v: Updater = field(default_factory=SGD)
    grad_u: Optional[np.ndarray] = None
    grad_v: Optional[np.ndarray] = None
    rate_u: float = float("nan")
    rate_v: float = float("nan")


def init_state(u0, v0, updater_u: Optional[Updater] = None,
               updater_v: Optional[Updater] = None) -> SolverState:
    """Cold-start state; updaters are cloned so their state starts empty."""
    u0 = as_vector(u0, "u0").copy()
    v0 = as_vector(v0, "v0").copy()
    return SolverState(
        u=u0, v=v0, u_prev=u0.copy(), v_prev=v0.copy(), k=0,
        updater_u=(updater_u or SGD()).fresh(),
        updater_v=(updater_v or SGD()).fresh(),
    )


def predict_point(u_next, u_prev):
    """Linear extrapolation ``u_next + (u_next - u_prev)``."""
    u_next = np.asarray(u_next, dtype=np.float64)
    u_prev = np.asarray(u_prev, dtype=np.float64)
    if u_next.shape != u_prev.shape:
        raise ValueError(f"dimension mismatch: {u_next.shape} vs {u_prev.shape}")
    return u_next + (u_next - u_prev)


def _no_prediction(u_next, u_prev):
    return u_next


def _finite(x, step, what):
    if not np.all(np.isfinite(x)):
        raise DivergenceError(step, what)
    return x


def _alternating_step(problem, state, sched_u, sched_v, predictor, predict_dual, rng):
    k = state.k + 1
    a = sched_u.rate(k)
    b = sched_v.rate(k)

    v_eval = predict_point(state.v, state.v_prev) if predict_dual else state.v
    g_u = _finite(problem.sample_grad_u(state.u, v_eval, rng), k, "gradient")
    u_new = _finite(state.updater_u.descend(state.u, g_u, a), k, "iterate")

    u_eval = predictor(u_new, state.u)
    g_v = _finite(problem.sample_grad_v(u_eval, state.v, rng), k, "gradient")
    v_new = _finite(state.updater_v.ascend(state.v, g_v, b), k, "iterate")

    return replace(state, u=u_new, v=v_new, u_prev=state.u, v_prev=state.v, k=k,
                   grad_u=g_u, grad_v=g_v, rate_u=a, rate_v=b)


def step_plain(problem: SaddleProblem, state: SolverState, sched_u: Schedule,
               sched_v: Schedule, rng: Optional[np.random.Generator] = None) -> SolverState:
    """One alternating step without prediction.

    ``rng`` selects stochastic gradients; ``None`` uses exact gradients.
    Raises :class:`DivergenceError` on a non-finite gradient or iterate.
    """
    return _alternating_step(problem, state, sched_u, sched_v, _no_prediction, False, rng)


def step_predict(problem: SaddleProblem, state: SolverState, sched_u: Schedule,
                 sched_v: Schedule, rng: Optional[np.random.Generator] = None, *,
                 predictor: Callable = predict_point, predict_dual: bool = False) -> SolverState:
    """One alternating step whose ascent uses the predicted primal point.

    ``predict_dual`` also extrapolates ``v`` before the primal gradient is
    taken. ``predictor`` exists so prediction can be switched off in tests.
    """
    return _alternating_step(problem, state, sched_u, sched_v, predictor, predict_dual, rng)


class TrajectoryRecord:
    """Rows recorded along a solver run plus running iterate averages.

    Row ``k`` holds the loss and distances to the saddle of ``(u_k, v_k)``,
    the gap of the running averages over the iterates produced by steps
    ``1..k``, the gap of the raw iterate, the step sizes, and the squared
    norms of the gradients used at step ``k``.
    """

    columns = ("k", "loss", "dist_u", "dist_v", "gap_avg", "gap", "alpha", "beta",
               "gsq_u", "gsq_v")

    def __init__(self, dim_u, dim_v, store_iterates=False):
        self.rows: List[tuple] = []
        self.sum_u = np.zeros(dim_u)
        self.sum_v = np.zeros(dim_v)
        self.count = 0
        self.store_iterates = store_iterates
        self.u_hist: List[np.ndarray] = []
        self.v_hist: List[np.ndarray] = []
        self.collapsed = False
        self.collapse_step: Optional[int] = None
        self.final_state: Optional[SolverState] = None

    def __len__(self):
        return len(self.rows)

    @property
    def u_avg(self):
        return self.sum_u / max(self.count, 1)

    @property
    def v_avg(self):
        return self.sum_v / max(self.count, 1)

    def accumulate(self, state: SolverState):
        self.sum_u += state.u
        self.sum_v += state.v
        self.count += 1
        if self.store_iterates:
            self.u_hist.append(state.u.copy())
            self.v_hist.append(state.v.copy())

    def record(self, problem: SaddleProblem, state: SolverState):
        if problem.saddle is not None:
            u_star, v_star = problem.saddle
            dist_u = float(np.linalg.norm(state.u - u_star))
            dist_v = float(np.linalg.norm(state.v - v_star))
            gap_avg = problem.loss(self.u_avg, v_star) - problem.loss(u_star, self.v_avg)
            gap = problem.loss(state.u, v_star) - problem.loss(u_star, state.v)
        else:
            dist_u = dist_v = gap_avg = gap = float("nan")
        self.rows.append((
            state.k, problem.loss(state.u, state.v), dist_u, dist_v, gap_avg, gap,
            state.rate_u, state.rate_v,
            float(state.grad_u @ state.grad_u), float(state.grad_v @ state.grad_v),
        ))

    def column(self, name) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows], dtype=np.float64)

    @property
    def norm(self) -> np.ndarray:
        """Distance of the joint iterate ``(u, v)`` to the saddle for each row."""
        return np.hypot(self.column("dist_u"), self.column("dist_v"))


def run(problem: SaddleProblem, init, method: str = "plain", updaters=None, schedules=None,
        n_steps: int = 1000, record_every: int = 1, *, rng=None, predict_dual=False,
        store_iterates=False, callback=None) -> TrajectoryRecord:
    """Drive ``n_steps`` alternating steps and record a trajectory.

    ``init`` is ``(u0, v0)``; ``updaters`` and ``schedules`` are
    ``(primal, dual)`` pairs. ``rng`` defaults to the problem's own noise
    stream. A non-finite gradient or iterate stops the run early and sets
    ``collapsed``; rows recorded before the failing step are kept.
    ``callback(state, record)`` runs after every recorded row.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    u0, v0 = init
    upd_u, upd_v = updaters if updaters is not None else (SGD(), SGD())
    sched_u, sched_v = schedules if schedules is not None else (Schedule(), Schedule())
    if rng is None:
        rng = problem.gradient_rng()

    state = init_state(as_vector(u0, "u0", problem.dim_u), as_vector(v0, "v0", problem.dim_v),
                       upd_u, upd_v)
    rec = TrajectoryRecord(problem.dim_u, problem.dim_v, store_iterates=store_iterates)
    if store_iterates:
        rec.u_hist.append(state.u.copy())
        rec.v_hist.append(state.v.copy())

    for _ in range(n_steps):
        try:
            if method == "plain":
                state = step_plain(problem, state, sched_u, sched_v, rng)
            else:
                state = step_predict(problem, state, sched_u, sched_v, rng,
                                     predict_dual=predict_dual)
        except DivergenceError as err:
            rec.collapsed = True
            rec.collapse_step = err.step
            break
        rec.accumulate(state)
        if state.k % record_every == 0 or state.k == n_steps:
            with np.errstate(over="ignore", invalid="ignore"):
                rec.record(problem, state)
            if not np.isfinite(rec.rows[-1][1]):
                rec.collapsed = True
                rec.collapse_step = state.k
                break
            if callback is not None:
                callback(state, rec)
    rec.final_state = state
    return rec
