"""Parametrized QNode: stacked variational layers and observable expectations.

One variational layer applies R_Y(theta_k) to every qubit k, then H on
qubit 0, then the all-qubit controlled phase CP(phi). ``depth`` such layers
act on ``|0...0>``. Angles are stored as a ``(depth, num_qubits)`` array
with ``angles[j, k]`` the rotation of qubit ``k`` in layer ``j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError, ShapeError
from .statevector import (
    MAX_QUBITS,
    StateVector,
    cp_all_kernel,
    h_kernel,
    init_zero_state,
    ry_kernel,
    z_signs,
)


class Observable(str, Enum):
    Z_SUM = "z_sum"  # sum_k Z_k
    Z_GLOBAL = "z_global"  # Z x ... x Z; plateau-prone baseline only


@dataclass(frozen=True)
class QNodeConfig:
    num_qubits: int
    depth: int
    phi: float = math.pi

    def __post_init__(self):
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise ConfigurationError(
                f"num_qubits must be in [1, {MAX_QUBITS}], got {self.num_qubits}"
            )
        if self.depth < 1:
            raise ConfigurationError(f"depth must be >= 1, got {self.depth}")
        if not 0.0 <= self.phi <= 2 * math.pi:
            raise ConfigurationError(f"phi must lie in [0, 2*pi], got {self.phi}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.depth, self.num_qubits)

    @property
    def num_params(self) -> int:
        return self.depth * self.num_qubits


def check_params(config: QNodeConfig, angles) -> np.ndarray:
    angles = np.asarray(angles, dtype=np.float64)
    if angles.shape != config.shape:
        raise ShapeError(f"QNode angles must have shape {config.shape}, got {angles.shape}")
    if not np.all(np.isfinite(angles)):
        raise ValueError("QNode angles must be finite")
    return angles


@lru_cache(maxsize=64)
def observable_diagonal(kind: Observable | str, num_qubits: int) -> np.ndarray:
    """Diagonal of the observable in the computational basis (both are Z-diagonal)."""
    kind = Observable(kind)
    if kind is Observable.Z_SUM:
        diag = sum(z_signs(num_qubits, k) for k in range(num_qubits))
    else:
        diag = np.prod([z_signs(num_qubits, k) for k in range(num_qubits)], axis=0)
    diag = np.asarray(diag, dtype=np.float64)
    diag.setflags(write=False)
    return diag


def apply_variational_layer(state: StateVector, layer_angles, phi: float) -> StateVector:
    layer_angles = np.asarray(layer_angles, dtype=np.float64)
    if layer_angles.shape != (state.num_qubits,):
        raise ShapeError(
            f"layer needs {state.num_qubits} angles, got shape {layer_angles.shape}"
        )
    _layer(state.amps, state.num_qubits, layer_angles, phi)
    return state


def _layer(amps: np.ndarray, n: int, layer_angles: np.ndarray, phi: float) -> None:
    # layer_angles: (n,) or (batch, n)
    for k in range(n):
        ry_kernel(amps, n, k, layer_angles[..., k])
    h_kernel(amps, n, 0)
    cp_all_kernel(amps, phi)


def prepare_qnode_state(config: QNodeConfig, angles) -> StateVector:
    angles = check_params(config, angles)
    state = init_zero_state(config.num_qubits)
    for j in range(config.depth):
        _layer(state.amps, config.num_qubits, angles[j], config.phi)
    return state


def prepare_batch(config: QNodeConfig, angles_batch: np.ndarray) -> np.ndarray:
    """Prepare many circuits at once; ``angles_batch`` has shape ``(B, depth, N)``."""
    b = angles_batch.shape[0]
    amps = np.zeros((b, 1 << config.num_qubits), dtype=np.complex128)
    amps[:, 0] = 1.0
    for j in range(config.depth):
        _layer(amps, config.num_qubits, angles_batch[:, j, :], config.phi)
    return amps


def expectation(config: QNodeConfig, angles, obs: Observable | str = Observable.Z_SUM) -> float:
    state = prepare_qnode_state(config, angles)
    diag = observable_diagonal(Observable(obs), config.num_qubits)
    return float(np.dot(diag, state.probabilities()))


def expectation_batch(config: QNodeConfig, angles_batch: np.ndarray, obs) -> np.ndarray:
    amps = prepare_batch(config, angles_batch)
    diag = observable_diagonal(Observable(obs), config.num_qubits)
    return (amps.real**2 + amps.imag**2) @ diag


def grad_parameter_shift(
    config: QNodeConfig, angles, obs: Observable | str = Observable.Z_SUM
) -> np.ndarray:
    """Exact gradient of the expectation by the two-term shift rule.

    Every angle drives an R_Y gate (generator Y/2), so
    ``d<O>/dtheta = (<O>(theta + pi/2) - <O>(theta - pi/2)) / 2``.
    All ``2 * depth * N`` shifted circuits are simulated as one batch.
    """
    return value_and_grad(config, angles, obs)[1]


def value_and_grad(config: QNodeConfig, angles, obs=Observable.Z_SUM) -> tuple[float, np.ndarray]:
    angles = check_params(config, angles)
    p = config.num_params
    shifts = np.zeros((2 * p + 1, p))
    idx = np.arange(p)
    shifts[1 + idx, idx] = math.pi / 2
    shifts[1 + p + idx, idx] = -math.pi / 2
    batch = angles.reshape(1, p) + shifts
    vals = expectation_batch(config, batch.reshape(-1, *config.shape), obs)
    grad = 0.5 * (vals[1 : p + 1] - vals[p + 1 :])
    return float(vals[0]), grad.reshape(config.shape)
