"""The classical discriminator: a 1 -> 50 -> 50 -> 1 fully connected
network with ELU, ELU and sigmoid activations, analytic gradients with
respect to parameters and input, and an Adam optimizer.

Parameters live in plain float64 arrays. The forward/backward pair is
vectorized over a batch axis; `backward` differentiates the weighted
sum of outputs, so batch means are expressed through the upstream
weights. The Adam implementation is generic over any list of arrays
and also drives the 3-angle quantum generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

LAYER_SIZES = (1, 50, 50, 1)


@dataclass
class MlpParams:
    """Weights and biases of the fixed 1-50-50-1 architecture."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def __post_init__(self):
        expect_w = [(a, b) for a, b in zip(LAYER_SIZES[:-1], LAYER_SIZES[1:])]
        got_w = [w.shape for w in self.weights]
        got_b = [b.shape for b in self.biases]
        if got_w != expect_w or got_b != [(n,) for n in LAYER_SIZES[1:]]:
            raise ValueError(f"bad layer shapes: weights {got_w}, biases {got_b}")
        for arr in self.weights + self.biases:
            if not np.all(np.isfinite(arr)):
                raise ValueError("non-finite parameter values")

    def as_list(self) -> list[np.ndarray]:
        """Flat parameter list [W1, W2, W3, b1, b2, b3]."""
        return list(self.weights) + list(self.biases)

    @staticmethod
    def from_list(arrays: list[np.ndarray]) -> "MlpParams":
        return MlpParams(weights=list(arrays[:3]), biases=list(arrays[3:]))

    def copy(self) -> "MlpParams":
        return MlpParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])


@dataclass
class AdamState:
    """First/second moment accumulators and step count for a parameter list."""

    lr: float
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @staticmethod
    def for_params(params: list[np.ndarray], lr: float) -> "AdamState":
        return AdamState(
            lr=lr,
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
        )


def init_mlp(seed: int) -> MlpParams:
    """Glorot-uniform weights (limit sqrt(6/(fan_in+fan_out))), zero biases."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(LAYER_SIZES[:-1], LAYER_SIZES[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, (fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpParams(weights, biases)


def elu(u: np.ndarray) -> np.ndarray:
    return np.where(u >= 0, u, np.expm1(np.minimum(u, 0.0)))


def elu_prime(u: np.ndarray) -> np.ndarray:
    return np.where(u >= 0, 1.0, np.exp(np.minimum(u, 0.0)))


def sigmoid(u: np.ndarray) -> np.ndarray:
    out = np.empty_like(u)
    pos = u >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-u[pos]))
    eu = np.exp(u[~pos])
    out[~pos] = eu / (1.0 + eu)
    return out


def forward(params: MlpParams, x) -> np.ndarray:
    """D(x) in (0, 1); scalar in, scalar out; batch in, batch out."""
    out, _ = forward_cached(params, np.atleast_1d(np.asarray(x, dtype=float)))
    return out if np.ndim(x) else float(out[0])


def forward_cached(params: MlpParams, x: np.ndarray):
    """Forward pass keeping pre-activations for the backward pass."""
    w, b = params.weights, params.biases
    x = np.asarray(x, dtype=float).reshape(-1, 1)
    u1 = x @ w[0] + b[0]
    h1 = elu(u1)
    u2 = h1 @ w[1] + b[1]
    h2 = elu(u2)
    u3 = h2 @ w[2] + b[2]
    d = sigmoid(u3).ravel()
    return d, (x, u1, h1, u2, h2, d)


def backward(params: MlpParams, cache, upstream: np.ndarray):
    """Gradients of sum_i upstream_i * D(x_i).

    Returns (parameter gradients as a flat list matching
    MlpParams.as_list(), gradient with respect to each input x_i).
    """
    w = params.weights
    x, u1, h1, u2, h2, d = cache
    du3 = (d * (1.0 - d) * np.asarray(upstream, dtype=float)).reshape(-1, 1)
    g_w3 = h2.T @ du3
    g_b3 = du3.sum(axis=0)
    dh2 = du3 @ w[2].T
    du2 = dh2 * elu_prime(u2)
    g_w2 = h1.T @ du2
    g_b2 = du2.sum(axis=0)
    dh1 = du2 @ w[1].T
    du1 = dh1 * elu_prime(u1)
    g_w1 = x.T @ du1
    g_b1 = du1.sum(axis=0)
    dx = (du1 @ w[0].T).ravel()
    return [g_w1, g_w2, g_w3, g_b1, g_b2, g_b3], dx


def adam_step(params: list[np.ndarray], grads: list[np.ndarray], state: AdamState) -> list[np.ndarray]:
    """One Adam update; returns new parameter arrays, mutates state in place."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError("parameter/gradient/state length mismatch")
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise ValueError(f"shape mismatch: parameter {p.shape} vs gradient {g.shape}")
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    out = []
    for i, (p, g) in enumerate(zip(params, grads)):
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * g
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g
        m_hat = state.m[i] / (1.0 - b1**state.t)
        v_hat = state.v[i] / (1.0 - b2**state.t)
        out.append(p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps))
    return out
