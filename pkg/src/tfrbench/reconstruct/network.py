"""Minimal fully connected network with manual backpropagation (numpy only)."""
from __future__ import annotations

import numpy as np

from ..errors import DivergenceError


def _act(name, z):
    if name == "tanh":
        return np.tanh(z)
    if name == "relu":
        return np.maximum(z, 0.0)
    raise ValueError(f"unknown activation {name!r}")


def _act_grad(name, z, a):
    if name == "tanh":
        return 1.0 - a * a
    return (z > 0).astype(z.dtype)


class MLP:
    """Dense network ``sizes[0] -> ... -> sizes[-1]`` with a linear output layer.

    Hidden layers use ``activation``.  Weights are stored as ``(fan_in, fan_out)``
    matrices so that a batch ``X`` of shape ``(S, fan_in)`` maps to ``X @ W + b``.
    ``zero_output=True`` starts the output layer at zero, so the untrained net is
    the constant 0 and no random offset has to be trained away.
    """

    def __init__(self, sizes, activation="tanh", rng=None, weights=None, zero_output=False):
        self.sizes = tuple(int(s) for s in sizes)
        self.activation = activation
        if weights is not None:
            self.W = [np.array(w, dtype=float) for w, _ in weights]
            self.b = [np.array(b, dtype=float) for _, b in weights]
            return
        rng = np.random.default_rng(rng)
        self.W, self.b = [], []
        for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
            if activation == "relu":
                w = rng.normal(0.0, np.sqrt(2.0 / fan_in), (fan_in, fan_out))
            else:
                lim = np.sqrt(6.0 / (fan_in + fan_out))
                w = rng.uniform(-lim, lim, (fan_in, fan_out))
            self.W.append(w)
            self.b.append(np.zeros(fan_out))
        if zero_output:
            self.W[-1][:] = 0.0

    @property
    def params(self):
        return self.W + self.b

    def forward(self, X, keep=False):
        a = X
        cache = [(None, X)]
        last = len(self.W) - 1
        for i, (W, b) in enumerate(zip(self.W, self.b)):
            z = a @ W + b
            a = z if i == last else _act(self.activation, z)
            if keep:
                cache.append((z, a))
        return (a, cache) if keep else a

    __call__ = forward

    def backward(self, cache, grad_out):
        """Gradients of the loss w.r.t. ``W`` and ``b`` given ``dL/d(output)``."""
        gW = [None] * len(self.W)
        gb = [None] * len(self.b)
        delta = grad_out
        for i in range(len(self.W) - 1, -1, -1):
            a_prev = cache[i][1]
            gW[i] = a_prev.T @ delta
            gb[i] = delta.sum(axis=0)
            if i:
                z, a = cache[i]
                delta = (delta @ self.W[i].T) * _act_grad(self.activation, z, a)
        return gW + gb


def loss_and_grad(net: MLP, X, Y, loss: str):
    with np.errstate(over="ignore", invalid="ignore"):
        out, cache = net.forward(X, keep=True)
        err = out - Y
        if loss == "mse":
            value = float(np.mean(err * err))
            g = 2.0 * err / err.size
        elif loss == "mae":
            value = float(np.mean(np.abs(err)))
            g = np.sign(err) / err.size
        else:
            raise ValueError(f"unknown loss {loss!r}")
    if not np.isfinite(value):
        raise DivergenceError("training loss became non-finite")
    return value, net.backward(cache, g)


def train(net: MLP, X, Y, *, loss="mse", optimizer="gd", lr=0.05, epochs=1000,
          schedule="constant"):
    """Full-batch training; returns the loss recorded before every update.

    ``optimizer`` is ``"gd"`` (plain gradient descent) or ``"adam"``.
    ``schedule="cosine"`` decays the step size to zero over the run.
    """
    params = net.params
    history = np.empty(epochs)
    if optimizer == "adam":
        m = [np.zeros_like(p) for p in params]
        v = [np.zeros_like(p) for p in params]
        beta1, beta2, eps = 0.9, 0.999, 1e-8
    for epoch in range(epochs):
        step = lr
        if schedule == "cosine":
            step = 0.5 * lr * (1.0 + np.cos(np.pi * epoch / epochs))
        value, grads = loss_and_grad(net, X, Y, loss)
        history[epoch] = value
        if optimizer == "gd":
            for p, g in zip(params, grads):
                p -= step * g
        else:
            t = epoch + 1
            c1 = 1.0 - beta1 ** t
            root_c2 = np.sqrt(1.0 - beta2 ** t)
            for p, g, mi, vi in zip(params, grads, m, v):
                mi *= beta1
                mi += (1.0 - beta1) * g
                g *= g
                vi *= beta2
                vi += (1.0 - beta2) * g
                denom = np.sqrt(vi)
                denom /= root_c2
                denom += eps
                np.divide(mi, denom, out=denom)
                denom *= step / c1
                p -= denom
    return history


def windowed_non_increasing(history, window=50, warmup=0, slack=0.0) -> bool:
    """True when the mean loss of each successive ``window``-epoch block never rises."""
    h = np.asarray(history)[warmup:]
    nblk = h.size // window
    if nblk < 2:
        return True
    means = h[: nblk * window].reshape(nblk, window).mean(axis=1)
    return bool(np.all(np.diff(means) <= slack))
