from .schedules import Schedule, constant, inverse_sqrt
from .updaters import SGD, Adam, MomentumSGD, Updater, adam_update, make_updater
from .solver import (DivergenceError, SolverState, TrajectoryRecord, init_state, predict_point,
                     run, step_plain, step_predict)
from .estimator import SaddlePointSolver

__all__ = [
    "Schedule", "constant", "inverse_sqrt", "SGD", "Adam", "MomentumSGD", "Updater",
    "adam_update", "make_updater", "DivergenceError", "SolverState", "TrajectoryRecord",
    "init_state", "predict_point", "run", "step_plain", "step_predict", "SaddlePointSolver",
]
