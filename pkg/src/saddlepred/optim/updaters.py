"""Inner updaters turning a gradient into a parameter step.

Every updater exposes ``descend(x, g, rate)``; ``ascend`` is descent on the
negated gradient, so the two differ only by the sign of ``g``. Updaters carry
per-parameter state (momentum buffers, Adam moments) and must not be shared
between the primal and dual variables.
"""
import copy

import numpy as np


class Updater:
    kind = "base"

    def descend(self, x, g, rate):
        raise NotImplementedError

    def ascend(self, x, g, rate):
        return self.descend(x, -g, rate)

    def fresh(self):
        """Copy with the same hyperparameters and cleared state."""
        clone = copy.copy(self)
        clone.reset()
        return clone

    def reset(self):
        pass


class SGD(Updater):
    kind = "sgd"

    def descend(self, x, g, rate):
        return x - rate * g

    def __repr__(self):
        return "SGD()"


class MomentumSGD(Updater):
    """Heavy-ball SGD: ``buf = momentum * buf + g``; ``x -= rate * buf``."""

    kind = "momentum_sgd"

    def __init__(self, momentum=0.9):
        if not 0 <= momentum < 1:
            raise ValueError("momentum must lie in [0, 1)")
        self.momentum = momentum
        self.buf = None

    def reset(self):
        self.buf = None

    def descend(self, x, g, rate):
        if self.buf is None:
            self.buf = np.array(g, dtype=np.float64, copy=True)
        else:
            self.buf = self.momentum * self.buf + g
        return x - rate * self.buf

    def __repr__(self):
        return f"MomentumSGD(momentum={self.momentum})"


class Adam(Updater):
    """Bias-corrected Adam; ``rate`` plays the role of the learning rate."""

    kind = "adam"

    def __init__(self, beta1=0.9, beta2=0.999, epsilon=1e-8):
        if not (0 <= beta1 < 1 and 0 <= beta2 < 1):
            raise ValueError("beta1 and beta2 must lie in [0, 1)")
        if not epsilon > 0:
            raise ValueError("epsilon must be positive")
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.reset()

    def reset(self):
        self.m = None
        self.v = None
        self.t = 0

    def descend(self, x, g, rate):
        new_x, self.m, self.v, self.t = adam_update(
            x, g, rate, self.m, self.v, self.t, self.beta1, self.beta2, self.epsilon)
        return new_x

    def __repr__(self):
        return f"Adam(beta1={self.beta1}, beta2={self.beta2}, epsilon={self.epsilon})"


def adam_update(x, g, rate, m=None, v=None, t=0, beta1=0.9, beta2=0.999, epsilon=1e-8):
    """One Adam descent step; returns ``(x_new, m, v, t)``.

    ``m``/``v`` are the biased moment estimates (``None`` before the first step).
    """
    if m is None:
        m = np.zeros_like(x, dtype=np.float64)
        v = np.zeros_like(x, dtype=np.float64)
    t += 1
    m = beta1 * m + (1.0 - beta1) * g
    v = beta2 * v + (1.0 - beta2) * (g * g)
    m_hat = m / (1.0 - beta1 ** t)
    v_hat = v / (1.0 - beta2 ** t)
    return x - rate * m_hat / (np.sqrt(v_hat) + epsilon), m, v, t


UPDATER_KINDS = ("sgd", "momentum_sgd", "adam")


def make_updater(kind="sgd", *, momentum=0.9, beta1=0.9, beta2=0.999, epsilon=1e-8):
    if kind == "sgd":
        return SGD()
    if kind in ("momentum_sgd", "momentum"):
        return MomentumSGD(momentum)
    if kind == "adam":
        return Adam(beta1, beta2, epsilon)
    raise ValueError(f"unknown updater {kind!r}; expected one of {UPDATER_KINDS}")
