"""scikit-learn style front end for the alternating saddle-point solvers."""
import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ..problems import SaddleProblem, make_rng, primal_dual_gap
from .schedules import Schedule
from .solver import METHODS, run
from .updaters import make_updater


class SaddlePointSolver(BaseEstimator):
    """Alternating descent/ascent on a :class:`SaddleProblem`, optionally with prediction.

    Parameters mirror :func:`saddlepred.optim.run`. ``lr_u`` and ``lr_v`` are
    the schedule bases (``C_alpha`` and ``C_beta`` for ``inverse_sqrt``).
    ``random_state`` only seeds the default initial point; gradient noise
    comes from the problem's own configuration.

    Attributes set by :meth:`fit`: ``u_``, ``v_``, ``u_avg_``, ``v_avg_``,
    ``trajectory_``, ``collapsed_``, ``n_iter_``.
    """

    def __init__(self, method="predict", updater="sgd", lr_u=0.1, lr_v=0.1,
                 schedule="constant", momentum=0.9, beta1=0.9, beta2=0.999,
                 epsilon=1e-8, n_steps=1000, record_every=1, predict_dual=False,
                 store_iterates=False, random_state=None):
        self.method = method
        self.updater = updater
        self.lr_u = lr_u
        self.lr_v = lr_v
        self.schedule = schedule
        self.momentum = momentum
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.n_steps = n_steps
        self.record_every = record_every
        self.predict_dual = predict_dual
        self.store_iterates = store_iterates
        self.random_state = random_state

    def _updaters(self):
        kw = dict(momentum=self.momentum, beta1=self.beta1, beta2=self.beta2, epsilon=self.epsilon)
        return make_updater(self.updater, **kw), make_updater(self.updater, **kw)

    def fit(self, problem: SaddleProblem, u0=None, v0=None):
        if not isinstance(problem, SaddleProblem):
            raise TypeError("fit expects a SaddleProblem")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        rng = make_rng(0 if self.random_state is None else self.random_state)
        if u0 is None:
            u0 = rng.standard_normal(problem.dim_u)
        if v0 is None:
            v0 = rng.standard_normal(problem.dim_v)
        rec = run(
            problem, (u0, v0), method=self.method, updaters=self._updaters(),
            schedules=(Schedule(self.schedule, self.lr_u), Schedule(self.schedule, self.lr_v)),
            n_steps=self.n_steps, record_every=self.record_every,
            predict_dual=self.predict_dual, store_iterates=self.store_iterates,
        )
        self.trajectory_ = rec
        self.u_ = rec.final_state.u
        self.v_ = rec.final_state.v
        self.u_avg_ = rec.u_avg
        self.v_avg_ = rec.v_avg
        self.collapsed_ = rec.collapsed
        self.n_iter_ = rec.final_state.k
        return self

    def score(self, problem: SaddleProblem):
        """Negative primal-dual gap of the averaged iterates (higher is better)."""
        if not hasattr(self, "u_avg_"):
            raise NotFittedError("call fit before score")
        return -primal_dual_gap(problem, self.u_avg_, self.v_avg_)
