"""Minimal dense-network engine with hand-written reverse-mode gradients.

Networks are rectified-hidden-unit MLPs with a linear or tanh output head.
``forward_cached`` retains the per-layer inputs needed by ``backward``,
which returns both the input gradient and per-parameter gradients, so the
action-generation chain of the diffusion policy can be differentiated end
to end.  Everything is float64 numpy; determinism follows from the caller's
seeded generators.
"""

from __future__ import annotations

from typing import List, Sequence, Tuple

import numpy as np

__all__ = ["Mlp", "Adam", "soft_update", "time_embedding"]

Cache = List[Tuple[np.ndarray, np.ndarray]]


class Mlp:
    """Fully connected approximator; parameters live in ``weights``/``biases``."""

    def __init__(self, sizes: Sequence[int], out_activation: str = "linear",
                 rng: np.random.Generator | None = None,
                 final_scale: float = 3e-3):
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        if out_activation not in ("linear", "tanh"):
            raise ValueError(f"unknown output activation {out_activation!r}")
        rng = rng or np.random.default_rng(0)
        self.sizes = tuple(int(s) for s in sizes)
        self.out_activation = out_activation
        self.weights: List[np.ndarray] = []
        self.biases: List[np.ndarray] = []
        last = len(sizes) - 2
        for idx, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            if idx == last:
                w = rng.uniform(-final_scale, final_scale, (fan_in, fan_out))
            else:
                w = rng.normal(0.0, np.sqrt(2.0 / fan_in), (fan_in, fan_out))
            self.weights.append(w)
            self.biases.append(np.zeros(fan_out))

    # parameters are exposed as one flat list, weights and biases interleaved
    @property
    def params(self) -> List[np.ndarray]:
        out: List[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def set_params(self, values: Sequence[np.ndarray]) -> None:
        expected = 2 * len(self.weights)
        if len(values) != expected:
            raise ValueError(f"expected {expected} parameter arrays")
        for idx in range(len(self.weights)):
            w, b = values[2 * idx], values[2 * idx + 1]
            if w.shape != self.weights[idx].shape or \
                    b.shape != self.biases[idx].shape:
                raise ValueError("parameter shape mismatch")
            self.weights[idx] = w.copy()
            self.biases[idx] = b.copy()

    def copy(self) -> "Mlp":
        dup = Mlp(self.sizes, self.out_activation)
        dup.set_params(self.params)
        return dup

    def forward(self, x: np.ndarray) -> np.ndarray:
        h = np.asarray(x, dtype=float)
        n_layers = len(self.weights)
        for idx, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if idx < n_layers - 1:
                h = np.maximum(h, 0.0)
            elif self.out_activation == "tanh":
                h = np.tanh(h)
        return h

    def forward_cached(self, x: np.ndarray) -> Tuple[np.ndarray, Cache]:
        h = np.asarray(x, dtype=float)
        cache: Cache = []
        n_layers = len(self.weights)
        for idx, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            cache.append((h, z))
            if idx < n_layers - 1:
                h = np.maximum(z, 0.0)
            elif self.out_activation == "tanh":
                h = np.tanh(z)
            else:
                h = z
        return h, cache

    def backward(self, cache: Cache, d_out: np.ndarray
                 ) -> Tuple[np.ndarray, List[np.ndarray]]:
        """Gradients of a scalar loss wrt the input and every parameter.

        ``d_out`` is the loss gradient at the network output for the batch
        that produced ``cache``.
        """
        grads: List[np.ndarray] = [np.empty(0)] * (2 * len(self.weights))
        dz = np.asarray(d_out, dtype=float)
        n_layers = len(self.weights)
        for idx in range(n_layers - 1, -1, -1):
            x_in, z = cache[idx]
            if idx == n_layers - 1:
                if self.out_activation == "tanh":
                    dz = dz * (1.0 - np.tanh(z) ** 2)
            else:
                dz = dz * (z > 0.0)
            grads[2 * idx] = x_in.T @ dz
            grads[2 * idx + 1] = dz.sum(axis=0)
            dz = dz @ self.weights[idx].T
        return dz, grads


class Adam:
    """Adaptive-moment gradient descent over a list of parameter arrays."""

    def __init__(self, params: List[np.ndarray], lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads: Sequence[np.ndarray]) -> None:
        if self.lr == 0.0:
            return
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            m_hat = m / (1.0 - b1 ** self.t)
            v_hat = v / (1.0 - b2 ** self.t)
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def soft_update(online: Sequence[np.ndarray], target: Sequence[np.ndarray],
                tau: float) -> None:
    """target <- tau * online + (1 - tau) * target, elementwise, in place."""
    if len(online) != len(target):
        raise ValueError("parameter lists differ in length")
    for src, dst in zip(online, target):
        if src.shape != dst.shape:
            raise ValueError("parameter shape mismatch")
        dst *= 1.0 - tau
        dst += tau * src


def time_embedding(step: int, dim: int) -> np.ndarray:
    """Sinusoidal embedding of a diffusion step index."""
    if dim % 2 != 0:
        raise ValueError("embedding dimension must be even")
    half = dim // 2
    freqs = np.exp(-np.log(10_000.0) * np.arange(half) / half)
    angles = step * freqs
    return np.concatenate([np.sin(angles), np.cos(angles)])
