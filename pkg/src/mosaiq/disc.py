"""Classical discriminator: a small ReLU MLP with sigmoid output, hand-written backprop."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError

P_EPS = 1e-7
HIDDEN = (64, 16)


@dataclass(frozen=True)
class MlpParams:
    weights: tuple[np.ndarray, ...]  # layer l maps (fan_in,) -> (fan_out,): shape (fan_out, fan_in)
    biases: tuple[np.ndarray, ...]

    @property
    def sizes(self) -> tuple[int, ...]:
        return (self.weights[0].shape[1],) + tuple(w.shape[0] for w in self.weights)

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def arrays(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out


@dataclass
class Cache:
    inputs: list[np.ndarray]  # input to each affine layer
    pre: list[np.ndarray]  # pre-activations
    prob: np.ndarray


def init_mlp(sizes, rng: np.random.Generator) -> MlpParams:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases."""
    ws, bs = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        s = 1.0 / np.sqrt(fan_in)
        ws.append(rng.uniform(-s, s, size=(fan_out, fan_in)))
        bs.append(rng.uniform(-s, s, size=fan_out))
    return MlpParams(tuple(ws), tuple(bs))


def init_discriminator(k: int, rng: np.random.Generator, hidden=HIDDEN) -> MlpParams:
    return init_mlp((k, *hidden, 1), rng)


def sigmoid(x):
    # split by sign so exp never overflows
    x = np.asarray(x, dtype=np.float64)
    e = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def forward(params: MlpParams, features) -> tuple[np.ndarray, Cache]:
    """Probability that each row of ``features`` is real, plus the backprop cache.

    Hidden layers use ReLU, the last layer a sigmoid.  Accepts (k,) or (B, k).
    """
    x = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if x.shape[1] != params.sizes[0]:
        raise ShapeError(f"discriminator expects {params.sizes[0]} features, got {x.shape[1]}")
    inputs, pre = [], []
    h = x
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        inputs.append(h)
        a = h @ w.T + b
        pre.append(a)
        h = sigmoid(a) if i == last else np.maximum(a, 0.0)
    prob = h[:, 0]
    return prob, Cache(inputs, pre, prob)


def bce(p, label) -> np.ndarray:
    p = np.clip(np.asarray(p, dtype=np.float64), P_EPS, 1.0 - P_EPS)
    y = np.asarray(label, dtype=np.float64)
    return -(y * np.log(p) + (1.0 - y) * np.log1p(-p))


def bce_grad(p, label) -> np.ndarray:
    """d bce / d p, evaluated at the clamped probability."""
    p = np.clip(np.asarray(p, dtype=np.float64), P_EPS, 1.0 - P_EPS)
    y = np.asarray(label, dtype=np.float64)
    return -y / p + (1.0 - y) / (1.0 - p)


def backward(params: MlpParams, cache: Cache, d_prob) -> tuple[MlpParams, np.ndarray]:
    """Backpropagate d loss / d prob (one value per row).

    Returns gradients in ``MlpParams`` form (summed over rows) and the
    gradient with respect to the input features, shape (B, k).
    """
    g = np.asarray(d_prob, dtype=np.float64).reshape(-1)
    if g.shape[0] != cache.prob.shape[0] or len(cache.pre) != len(params.weights):
        raise ShapeError("cache does not match this gradient/parameter set")
    last = len(params.weights) - 1
    grad = (g * cache.prob * (1.0 - cache.prob))[:, None]
    gw, gb = [None] * (last + 1), [None] * (last + 1)
    for i in range(last, -1, -1):
        if i != last:
            grad = grad * (cache.pre[i] > 0.0)
        if cache.inputs[i].shape[1] != params.weights[i].shape[1]:
            raise ShapeError("stale cache: layer widths changed")
        gw[i] = grad.T @ cache.inputs[i]
        gb[i] = grad.sum(axis=0)
        grad = grad @ params.weights[i]
    return MlpParams(tuple(gw), tuple(gb)), grad


def sgd_step(params: MlpParams, grads: MlpParams, lr: float) -> MlpParams:
    if lr < 0:
        raise ValueError("learning rate must be non-negative")
    if [w.shape for w in params.arrays()] != [w.shape for w in grads.arrays()]:
        raise ShapeError("gradient shapes do not match parameters")
    return MlpParams(
        tuple(w - lr * gw for w, gw in zip(params.weights, grads.weights)),
        tuple(b - lr * gb for b, gb in zip(params.biases, grads.biases)),
    )
