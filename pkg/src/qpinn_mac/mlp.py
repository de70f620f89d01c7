"""Scalar-input MLP with exact time derivatives and weight gradients.

Every layer, the output layer included, computes ``x = act(W @ x_prev + b)``.
The time derivative is carried alongside the value as a forward-mode
tangent (seed ``dt/dt = 1``). :func:`mlp_backprop` differentiates the
scalar ``sum(out_adjoint * y) + sum(tangent_adjoint * dy/dt)`` with respect
to all weights and biases by reverse mode over that forward pass.

Flat parameter layout: layer-major; within a layer the weight matrix
row-major (``out x in``), then the bias vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ShapeError, UnsupportedActivationError


class Activation(str, Enum):
    TANH = "tanh"
    SIGMOID = "sigmoid"
    RELU = "relu"

    @property
    def smooth(self) -> bool:
        return self is not Activation.RELU


def _act(kind: Activation, z):
    if kind is Activation.TANH:
        return np.tanh(z)
    if kind is Activation.SIGMOID:
        return 1.0 / (1.0 + np.exp(-z))
    return np.maximum(z, 0.0)


def _act_derivs(kind: Activation, s):
    """First and second derivative of the activation given its output ``s``."""
    if kind is Activation.TANH:
        d1 = 1.0 - s * s
        return d1, -2.0 * s * d1
    if kind is Activation.SIGMOID:
        d1 = s * (1.0 - s)
        return d1, d1 * (1.0 - 2.0 * s)
    raise UnsupportedActivationError(
        "relu has no usable second derivative; use tanh or sigmoid for derivative paths"
    )


def require_smooth(act) -> Activation:
    act = Activation(act)
    if not act.smooth:
        raise UnsupportedActivationError(
            f"activation {act.value!r} is not smooth; derivative paths need tanh or sigmoid"
        )
    return act


@dataclass
class MLPParams:
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def __post_init__(self):
        self.weights = [np.asarray(w, dtype=np.float64) for w in self.weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in self.biases]
        if not self.weights or len(self.weights) != len(self.biases):
            raise ShapeError("MLP needs one bias per weight matrix and at least one layer")
        fan_in = 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or w.shape[1] != fan_in or b.shape != (w.shape[0],):
                raise ShapeError(
                    f"layer {i}: weight {w.shape} / bias {b.shape} do not chain from width {fan_in}"
                )
            fan_in = w.shape[0]

    @property
    def widths(self) -> list[int]:
        return [1] + [w.shape[0] for w in self.weights]

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[0]

    @property
    def num_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def flatten(self) -> np.ndarray:
        parts = []
        for w, b in zip(self.weights, self.biases):
            parts.append(w.ravel())
            parts.append(b)
        return np.concatenate(parts)

    def unflatten(self, flat) -> "MLPParams":
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != (self.num_params,):
            raise ShapeError(f"expected {self.num_params} parameters, got {flat.shape}")
        weights, biases, pos = [], [], 0
        for w, b in zip(self.weights, self.biases):
            weights.append(flat[pos : pos + w.size].reshape(w.shape))
            pos += w.size
            biases.append(flat[pos : pos + b.size].copy())
            pos += b.size
        return MLPParams(weights, biases)

    def copy(self) -> "MLPParams":
        return MLPParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])


def init_mlp(hidden: Sequence[int], output_dim: int, rng: np.random.Generator) -> MLPParams:
    """Glorot-uniform weights, zero biases."""
    sizes = [1, *hidden, output_dim]
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MLPParams(weights, biases)


class DualValue(NamedTuple):
    value: np.ndarray
    tangent: np.ndarray


def _as_batch(t):
    t = np.asarray(t, dtype=np.float64)
    return t.reshape(-1, 1), t.ndim == 0


def _forward(params: MLPParams, act: Activation, t, with_tangent: bool):
    x, scalar = _as_batch(t)
    dx = np.ones_like(x) if with_tangent else None
    cache = []
    for w, b in zip(params.weights, params.biases):
        x_prev, dx_prev = x, dx
        x = _act(act, x_prev @ w.T + b)
        if with_tangent:
            d1, d2 = _act_derivs(act, x)
            dz = dx_prev @ w.T
            dx = d1 * dz
            cache.append((x_prev, dx_prev, d1, d2, dz))
    return x, dx, cache, scalar


def mlp_forward(params: MLPParams, act, t) -> np.ndarray:
    """Network output at ``t``; shape ``(M,)`` for scalar t, ``(K, M)`` for K times."""
    act = Activation(act)
    x, _, _, scalar = _forward(params, act, t, with_tangent=False)
    return x[0] if scalar else x


def mlp_forward_dual(params: MLPParams, act, t) -> DualValue:
    act = require_smooth(act)
    x, dx, _, scalar = _forward(params, act, t, with_tangent=True)
    if scalar:
        return DualValue(x[0], dx[0])
    return DualValue(x, dx)


def mlp_backprop(params: MLPParams, act, t, out_adjoint, tangent_adjoint) -> np.ndarray:
    """Flat gradient of ``sum(out_adjoint*y(t)) + sum(tangent_adjoint*y'(t))``.

    Adjoints have the same shape as the network output at ``t``; for a batch
    of times the contributions of all rows are summed.
    """
    act = require_smooth(act)
    x, dx, cache, scalar = _forward(params, act, t, with_tangent=True)
    gx = np.asarray(out_adjoint, dtype=np.float64).reshape(x.shape[0], -1)
    gdx = np.asarray(tangent_adjoint, dtype=np.float64).reshape(x.shape[0], -1)
    if gx.shape != x.shape or gdx.shape != x.shape:
        raise ShapeError(
            f"adjoints must match output shape {x.shape[1:] if scalar else x.shape}, "
            f"got {np.shape(out_adjoint)} and {np.shape(tangent_adjoint)}"
        )
    grads = []
    for (w, _), (x_prev, dx_prev, d1, d2, dz) in zip(
        reversed(list(zip(params.weights, params.biases))), reversed(cache)
    ):
        gz = gx * d1 + gdx * d2 * dz
        gdz = gdx * d1
        gw = gz.T @ x_prev + gdz.T @ dx_prev
        gb = gz.sum(axis=0)
        grads.append((gw, gb))
        gx = gz @ w
        gdx = gdz @ w
    flat = []
    for gw, gb in reversed(grads):
        flat.append(gw.ravel())
        flat.append(gb)
    return np.concatenate(flat)
