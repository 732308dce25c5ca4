"""Small hand-wired dense networks, BCE loss and the RMSProp/Adam optimizers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PROB_CLAMP = 1e-7


@dataclass
class LinearLayer:
    weights: np.ndarray  # (out_dim, in_dim)
    bias: np.ndarray  # (out_dim,)

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


def init_layer(in_dim: int, out_dim: int, rng, dtype=np.float64) -> LinearLayer:
    """Weights and bias i.i.d. Uniform(-1/sqrt(in_dim), 1/sqrt(in_dim))."""
    if in_dim < 1 or out_dim < 1:
        raise ValueError("layer dimensions must be >= 1")
    bound = 1.0 / np.sqrt(in_dim)
    weights = rng.uniform(-bound, bound, (out_dim, in_dim)).astype(dtype)
    bias = rng.uniform(-bound, bound, out_dim).astype(dtype)
    return LinearLayer(weights, bias)


def linear_forward(layer: LinearLayer, x: np.ndarray) -> np.ndarray:
    """``W x + b`` for a vector or each row of a ``(batch, in_dim)`` matrix."""
    x = np.asarray(x)
    if x.shape[-1] != layer.in_dim:
        raise ValueError(f"expected input of size {layer.in_dim}, got {x.shape[-1]}")
    return x @ layer.weights.T + layer.bias


def linear_backward(layer: LinearLayer, x: np.ndarray, upstream: np.ndarray):
    """Return ``(grad_weights, grad_bias, grad_x)``; batched inputs sum over rows."""
    x = np.asarray(x)
    upstream = np.asarray(upstream)
    if x.shape[-1] != layer.in_dim or upstream.shape[-1] != layer.out_dim:
        raise ValueError("shape mismatch in linear_backward")
    if x.ndim == 1:
        return np.outer(upstream, x), upstream.copy(), layer.weights.T @ upstream
    if x.shape[0] != upstream.shape[0]:
        raise ValueError("batch sizes differ in linear_backward")
    grad_w = upstream.T @ x
    return grad_w, upstream.sum(axis=0), upstream @ layer.weights


def tanh_forward(z):
    return np.tanh(z)


def tanh_backward(out, upstream):
    """Backward through tanh given its *output*."""
    return upstream * (1.0 - out * out)


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    # split on sign so exp never overflows
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out if out.ndim else float(out)


def sigmoid_backward(p, upstream):
    return upstream * p * (1.0 - p)


def bce_loss(p, y):
    """Binary cross-entropy on the clamped probability; returns ``(loss, dloss_dp)``."""
    p = np.clip(np.asarray(p, dtype=np.float64), PROB_CLAMP, 1.0 - PROB_CLAMP)
    y = np.asarray(y, dtype=np.float64)
    loss = -(y * np.log(p) + (1.0 - y) * np.log1p(-p))
    grad = (p - y) / (p * (1.0 - p))
    if loss.ndim == 0:
        return float(loss), float(grad)
    return loss, grad


@dataclass
class RMSProp:
    lr: float = 0.01
    decay: float = 0.9
    eps: float = 1e-8
    v: np.ndarray | None = field(default=None, repr=False)

    kind = "RMSProp"

    def step(self, params: np.ndarray, grads: np.ndarray) -> None:
        """In-place update of ``params``."""
        if params.shape != grads.shape:
            raise ValueError(f"parameter shape {params.shape} != gradient shape {grads.shape}")
        if self.v is None:
            self.v = np.zeros_like(params)
        g = grads.astype(params.dtype, copy=False)
        # same arithmetic as v = decay v + (1 - decay) g^2; p -= lr g / (sqrt(v) + eps),
        # written with two scratch buffers because controller heads can be huge
        scratch = np.multiply(g, g)
        scratch *= 1.0 - self.decay
        self.v *= self.decay
        self.v += scratch
        np.sqrt(self.v, out=scratch)
        scratch += self.eps
        step = np.multiply(g, self.lr)
        step /= scratch
        params -= step


@dataclass
class Adam:
    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    m: np.ndarray | None = field(default=None, repr=False)
    v: np.ndarray | None = field(default=None, repr=False)
    t: int = 0

    kind = "Adam"

    def step(self, params: np.ndarray, grads: np.ndarray) -> None:
        if params.shape != grads.shape:
            raise ValueError(f"parameter shape {params.shape} != gradient shape {grads.shape}")
        if self.m is None:
            self.m = np.zeros_like(params)
            self.v = np.zeros_like(params)
        g = grads.astype(params.dtype, copy=False)
        self.t += 1
        self.m *= self.beta1
        self.m += (1.0 - self.beta1) * g
        self.v *= self.beta2
        self.v += (1.0 - self.beta2) * g * g
        m_hat = self.m / (1.0 - self.beta1 ** self.t)
        v_hat = self.v / (1.0 - self.beta2 ** self.t)
        params -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def make_optimizer(kind: str, lr: float):
    if kind == "RMSProp":
        return RMSProp(lr=lr)
    if kind == "Adam":
        return Adam(lr=lr)
    raise ValueError(f"unknown optimizer {kind!r}")
