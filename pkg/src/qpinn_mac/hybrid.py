"""Multiplicative-additive coupling of the MLP with one QNode per output.

Output ``j`` is ``y_j(t) = (yhat_j(t) + 1) * <O>_j`` where ``yhat`` is the
MLP and ``<O>_j`` the expectation of QNode ``j``. The angles carry no time
dependence, so ``dy_j/dt = yhat_j'(t) * <O>_j``.

Gradients are taken of the scalarized quantity
``S = sum(adj * y) + sum(adj_dt * dy/dt)`` summed over all evaluation
times. Every loss term reduces to a choice of the two adjoint arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ShapeError
from .mlp import Activation, MLPParams, init_mlp, mlp_backprop, mlp_forward_dual
from .qnode import Observable, QNodeConfig, check_params, expectation, value_and_grad


@dataclass
class HybridModel:
    mlp: MLPParams
    act: Activation
    qnode_config: QNodeConfig
    qnode_params: list[np.ndarray]
    obs: Observable = Observable.Z_SUM

    def __post_init__(self):
        self.act = Activation(self.act)
        self.obs = Observable(self.obs)
        self.qnode_params = [check_params(self.qnode_config, a) for a in self.qnode_params]
        if len(self.qnode_params) != self.mlp.output_dim:
            raise ShapeError(
                f"{len(self.qnode_params)} QNodes for {self.mlp.output_dim} MLP outputs"
            )

    @property
    def dim(self) -> int:
        return self.mlp.output_dim

    @property
    def num_classical(self) -> int:
        return self.mlp.num_params

    @property
    def num_quantum(self) -> int:
        return self.dim * self.qnode_config.num_params

    def flatten(self) -> np.ndarray:
        return np.concatenate([self.mlp.flatten()] + [a.ravel() for a in self.qnode_params])

    def with_flat(self, flat) -> "HybridModel":
        flat = np.asarray(flat, dtype=np.float64)
        nc = self.num_classical
        mlp = self.mlp.unflatten(flat[:nc])
        q = flat[nc:].reshape(self.dim, *self.qnode_config.shape)
        return HybridModel(mlp, self.act, self.qnode_config, [a.copy() for a in q], self.obs)

    def copy(self) -> "HybridModel":
        return self.with_flat(self.flatten())

    def expectations(self) -> np.ndarray:
        return np.array(
            [expectation(self.qnode_config, a, self.obs) for a in self.qnode_params]
        )

    def expectations_and_grads(self) -> tuple[np.ndarray, list[np.ndarray]]:
        pairs = [value_and_grad(self.qnode_config, a, self.obs) for a in self.qnode_params]
        return np.array([v for v, _ in pairs]), [g for _, g in pairs]

    def evaluate(self, t):
        """Trajectory protocol: value and time derivative at ``t``."""
        ev = eval_mac(self, t)
        return ev.y_mac, ev.y_mac_dt


def init_hybrid(
    hidden: Sequence[int],
    output_dim: int,
    qnode_config: QNodeConfig,
    rng: np.random.Generator,
    act=Activation.TANH,
    obs=Observable.Z_SUM,
) -> HybridModel:
    """MLP by :func:`init_mlp`, QNode angles uniform on [0, 2*pi)."""
    mlp = init_mlp(hidden, output_dim, rng)
    qp = [rng.uniform(0.0, 2 * np.pi, size=qnode_config.shape) for _ in range(output_dim)]
    return HybridModel(mlp, act, qnode_config, qp, obs)


class ModelEval(NamedTuple):
    y_mac: np.ndarray
    y_mac_dt: np.ndarray
    y_hat: np.ndarray
    y_hat_dt: np.ndarray
    expectations: np.ndarray


def eval_mac(model: HybridModel, t, expectations=None) -> ModelEval:
    if expectations is None:
        expectations = model.expectations()
    y_hat, y_hat_dt = mlp_forward_dual(model.mlp, model.act, t)
    return ModelEval(
        (y_hat + 1.0) * expectations,
        y_hat_dt * expectations,
        y_hat,
        y_hat_dt,
        expectations,
    )


def _adjoints(ev: ModelEval, adj, adj_dt):
    adj = np.asarray(adj, dtype=np.float64)
    adj_dt = np.asarray(adj_dt, dtype=np.float64)
    if adj.shape != ev.y_mac.shape or adj_dt.shape != ev.y_mac.shape:
        raise ShapeError(
            f"adjoints must have shape {ev.y_mac.shape}, got {adj.shape} and {adj_dt.shape}"
        )
    return adj, adj_dt


def backward(model: HybridModel, t, adj, adj_dt, ev: ModelEval | None = None, qgrads=None):
    """Classical and quantum gradients of ``S`` in one pass.

    Returns ``(flat classical gradient, list of per-QNode angle gradients)``.
    ``ev`` and ``qgrads`` (expectation gradients per QNode) may be passed in
    when the caller already has them.
    """
    if qgrads is None:
        expectations, qgrads = model.expectations_and_grads()
        if ev is None:
            ev = eval_mac(model, t, expectations)
    if ev is None:
        ev = eval_mac(model, t)
    adj, adj_dt = _adjoints(ev, adj, adj_dt)
    g_classical = mlp_backprop(
        model.mlp, model.act, t, adj * ev.expectations, adj_dt * ev.expectations
    )
    factors = quantum_factors(ev, adj, adj_dt)
    g_quantum = [factors[j] * g for j, g in enumerate(qgrads)]
    return g_classical, g_quantum


def quantum_factors(ev: ModelEval, adj, adj_dt) -> np.ndarray:
    """Per-output scalar multiplying the expectation gradient of each QNode."""
    f = adj * (ev.y_hat + 1.0) + adj_dt * ev.y_hat_dt
    return f.reshape(-1, ev.expectations.shape[0]).sum(axis=0)


def grad_classical(model: HybridModel, t, adj, adj_dt) -> np.ndarray:
    ev = eval_mac(model, t)
    adj, adj_dt = _adjoints(ev, adj, adj_dt)
    return mlp_backprop(model.mlp, model.act, t, adj * ev.expectations, adj_dt * ev.expectations)


def grad_quantum(model: HybridModel, t, adj, adj_dt) -> list[np.ndarray]:
    return backward(model, t, adj, adj_dt)[1]
