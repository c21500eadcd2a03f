"""Fully connected networks on a flat parameter vector with hand-written backprop.

Parameters live in one float64 vector so that a network's weights can be
treated directly as an optimization variable. Layer ``l`` stores its
``(fan_in, fan_out)`` weight matrix followed by its bias.
"""
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
from scipy.special import expit

ACTIVATIONS = ("tanh", "linear", "sigmoid")


class StaleCacheError(RuntimeError):
    """``backward`` was called with parameters that differ from the forward pass."""


@dataclass
class ForwardCache:
    inputs: List[np.ndarray]
    outputs: List[np.ndarray]
    params: np.ndarray


class Mlp:
    def __init__(self, sizes: Sequence[int], activations: Sequence[str]):
        if len(sizes) < 2 or len(activations) != len(sizes) - 1:
            raise ValueError("need len(activations) == len(sizes) - 1 >= 1")
        for a in activations:
            if a not in ACTIVATIONS:
                raise ValueError(f"unknown activation {a!r}")
        self.sizes = tuple(int(s) for s in sizes)
        self.activations = tuple(activations)
        self.shapes = [(self.sizes[i], self.sizes[i + 1]) for i in range(len(self.sizes) - 1)]
        offsets = [0]
        for fan_in, fan_out in self.shapes:
            offsets.append(offsets[-1] + fan_in * fan_out + fan_out)
        self.offsets = offsets

    @property
    def n_params(self) -> int:
        return self.offsets[-1]

    @property
    def n_in(self):
        return self.sizes[0]

    @property
    def n_out(self):
        return self.sizes[-1]

    def __repr__(self):
        return f"Mlp(sizes={self.sizes}, activations={self.activations})"

    def unflatten(self, theta):
        """List of ``(W, b)`` views into ``theta``."""
        theta = np.asarray(theta)
        if theta.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got shape {theta.shape}")
        layers = []
        for (fan_in, fan_out), start in zip(self.shapes, self.offsets):
            w_end = start + fan_in * fan_out
            layers.append((theta[start:w_end].reshape(fan_in, fan_out), theta[w_end:w_end + fan_out]))
        return layers

    def flatten(self, layers) -> np.ndarray:
        return np.concatenate([np.concatenate([W.ravel(), b.ravel()]) for W, b in layers])

    def init_params(self, rng: np.random.Generator) -> np.ndarray:
        """Uniform in ``[-1/sqrt(fan_in), 1/sqrt(fan_in)]`` for weights and biases."""
        parts = []
        for fan_in, fan_out in self.shapes:
            bound = 1.0 / np.sqrt(fan_in)
            parts.append(rng.uniform(-bound, bound, size=fan_in * fan_out))
            parts.append(rng.uniform(-bound, bound, size=fan_out))
        return np.concatenate(parts)

    def forward(self, theta, x):
        """Return ``(output, cache)`` for a batch ``x`` of shape ``(n, n_in)``."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.n_in:
            raise ValueError(f"input must have shape (n, {self.n_in}), got {x.shape}")
        inputs, outputs = [], []
        h = x
        for (W, b), act in zip(self.unflatten(theta), self.activations):
            inputs.append(h)
            a = h @ W + b
            if act == "tanh":
                h = np.tanh(a)
            elif act == "sigmoid":
                h = expit(a)
            else:
                h = a
            outputs.append(h)
        return h, ForwardCache(inputs, outputs, np.array(theta, dtype=np.float64, copy=True))

    def __call__(self, theta, x):
        return self.forward(theta, x)[0]

    def backward(self, theta, cache: ForwardCache, output_grad):
        """Reverse pass; returns ``(grad_theta, grad_input)``.

        ``output_grad`` is the gradient of a scalar with respect to the network
        output (after the final activation).
        """
        if cache.params.shape != np.shape(theta) or not np.array_equal(cache.params, theta):
            raise StaleCacheError("cache was produced by different parameters")
        grad = np.empty(self.n_params)
        g = np.asarray(output_grad, dtype=np.float64)
        layers = self.unflatten(theta)
        grad_layers = self.unflatten(grad)
        for i in range(len(layers) - 1, -1, -1):
            act, out = self.activations[i], cache.outputs[i]
            if act == "tanh":
                g = g * (1.0 - out * out)
            elif act == "sigmoid":
                g = g * out * (1.0 - out)
            gW, gb = grad_layers[i]
            gW[...] = cache.inputs[i].T @ g
            gb[...] = g.sum(axis=0)
            g = g @ layers[i][0].T
        return grad, g


def generator_net(hidden=128, latent_dim=2, out_dim=2) -> Mlp:
    return Mlp([latent_dim, hidden, hidden, out_dim], ["tanh", "tanh", "linear"])


def discriminator_net(hidden=128, in_dim=2) -> Mlp:
    return Mlp([in_dim, hidden, hidden, 1], ["tanh", "tanh", "sigmoid"])
