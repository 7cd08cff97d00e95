"""Small tanh MLPs with hand-written backpropagation and plain SGD."""

from __future__ import annotations

import numpy as np


class Mlp:
    """Fully connected net, tanh on hidden layers and a linear output.

    Weights are drawn uniformly from ``[-scale, scale] / sqrt(fan_in)``.
    Inputs are batches of shape ``(n, sizes[0])``.
    """

    def __init__(self, sizes, rng: np.random.Generator | None = None, scale: float = 0.5):
        self.sizes = tuple(int(s) for s in sizes)
        self.W, self.b = [], []
        for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
            if rng is None:
                self.W.append(np.zeros((fan_in, fan_out)))
            else:
                self.W.append(rng.uniform(-scale, scale, (fan_in, fan_out)) / np.sqrt(fan_in))
            self.b.append(np.zeros(fan_out))

    @property
    def params(self) -> list[np.ndarray]:
        out = []
        for W, b in zip(self.W, self.b):
            out += [W, b]
        return out

    @property
    def n_params(self) -> int:
        return sum(p.size for p in self.params)

    def get_flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.params])

    def set_flat(self, flat) -> None:
        i = 0
        for p in self.params:
            p[...] = flat[i:i + p.size].reshape(p.shape)
            i += p.size

    def copy_from(self, other: "Mlp") -> None:
        for p, q in zip(self.params, other.params):
            p[...] = q

    def soft_update(self, other: "Mlp", rate: float) -> None:
        """``self <- rate * other + (1 - rate) * self``."""
        for p, q in zip(self.params, other.params):
            p *= 1.0 - rate
            p += rate * q

    def clone(self) -> "Mlp":
        twin = Mlp(self.sizes)
        twin.copy_from(self)
        return twin

    def forward(self, x):
        """Return ``(output, cache)``; the cache holds every layer's activation."""
        a = x if type(x) is np.ndarray and x.ndim == 2 else np.atleast_2d(np.asarray(x, dtype=float))
        acts = [a]
        last = len(self.W) - 1
        for k, (W, b) in enumerate(zip(self.W, self.b)):
            z = a @ W + b
            a = z if k == last else np.tanh(z)
            acts.append(a)
        return a, acts

    def __call__(self, x):
        return self.forward(x)[0]

    def backward(self, cache, grad_out):
        """Gradients of ``sum(grad_out * output)`` w.r.t. params (in ``params`` order) and input."""
        g = np.asarray(grad_out, dtype=float)
        grads = [None] * (2 * len(self.W))
        for k in range(len(self.W) - 1, -1, -1):
            if k != len(self.W) - 1:
                g = g * (1.0 - cache[k + 1] ** 2)
            grads[2 * k] = cache[k].T @ g
            grads[2 * k + 1] = g.sum(axis=0)
            g = g @ self.W[k].T
        return grads, g

    def sgd(self, grads, lr: float) -> None:
        for p, gp in zip(self.params, grads):
            p -= lr * gp

    def check_finite(self) -> bool:
        return all(np.all(np.isfinite(p)) for p in self.params)


def mlp_forward(net: Mlp, x) -> np.ndarray:
    return net(x)


def mlp_backward(net: Mlp, x, grad_out):
    """Weight gradients (``params`` order) for a loss whose output gradient is ``grad_out``."""
    _, cache = net.forward(x)
    return net.backward(cache, grad_out)[0]
