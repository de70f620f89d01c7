"""Dense statevector register with the three gates the ansatz needs.

Basis index ``i`` encodes ``|i_0 ... i_{N-1}>`` with qubit 0 as the most
significant bit. Gates are applied in place by viewing the amplitude array
as ``(2**q, 2, 2**(N-q-1))`` so that axis 1 is the target qubit; no dense
``2**N x 2**N`` matrix is ever formed.

The ``*_kernel`` functions operate on raw arrays with an optional leading
batch axis. The batched form lets :mod:`qpinn_mac.qnode` run all
parameter-shifted circuits in one pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

MAX_QUBITS = 20


@dataclass
class StateVector:
    num_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        self.amps = np.asarray(self.amps, dtype=np.complex128)
        if self.amps.shape != (1 << self.num_qubits,):
            raise ValueError(
                f"expected {1 << self.num_qubits} amplitudes for {self.num_qubits} qubits, "
                f"got shape {self.amps.shape}"
            )

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amps.copy())

    def norm_sq(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2


def _check_qubit(num_qubits: int, qubit: int) -> None:
    if not 0 <= qubit < num_qubits:
        raise IndexError(f"qubit {qubit} out of range for a {num_qubits}-qubit register")


def _qubit_view(amps: np.ndarray, num_qubits: int, qubit: int) -> np.ndarray:
    # Trailing axes only; a leading batch axis (if any) is preserved.
    lead = amps.shape[:-1]
    return amps.reshape(*lead, 1 << qubit, 2, 1 << (num_qubits - qubit - 1))


def ry_kernel(amps: np.ndarray, num_qubits: int, qubit: int, theta) -> None:
    """In-place R_Y on ``qubit``; ``theta`` is a scalar or one angle per batch row."""
    v = _qubit_view(amps, num_qubits, qubit)
    theta = np.asarray(theta, dtype=np.float64)
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    if theta.ndim:
        c = c.reshape(-1, 1, 1)
        s = s.reshape(-1, 1, 1)
    a0 = v[..., 0, :].copy()
    a1 = v[..., 1, :]
    v[..., 0, :] = c * a0 - s * a1
    v[..., 1, :] = s * a0 + c * a1


def h_kernel(amps: np.ndarray, num_qubits: int, qubit: int) -> None:
    v = _qubit_view(amps, num_qubits, qubit)
    r = 1.0 / math.sqrt(2.0)
    a0 = v[..., 0, :].copy()
    a1 = v[..., 1, :]
    v[..., 0, :] = r * (a0 + a1)
    v[..., 1, :] = r * (a0 - a1)


def cp_all_kernel(amps: np.ndarray, phi: float) -> None:
    amps[..., -1] *= np.exp(-1j * phi)


def z_signs(num_qubits: int, qubit: int) -> np.ndarray:
    """+1 where ``qubit``'s bit is 0, -1 where it is 1, over the basis."""
    bit = (np.arange(1 << num_qubits) >> (num_qubits - 1 - qubit)) & 1
    return 1.0 - 2.0 * bit


def init_zero_state(num_qubits: int, max_qubits: int = MAX_QUBITS) -> StateVector:
    if not isinstance(num_qubits, (int, np.integer)) or not 1 <= num_qubits <= max_qubits:
        raise ConfigurationError(
            f"num_qubits must be an integer in [1, {max_qubits}] (qubit cap {max_qubits}), "
            f"got {num_qubits!r}"
        )
    amps = np.zeros(1 << int(num_qubits), dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(int(num_qubits), amps)


def apply_ry(state: StateVector, qubit: int, theta: float) -> StateVector:
    _check_qubit(state.num_qubits, qubit)
    if not math.isfinite(theta):
        raise ValueError(f"theta must be finite, got {theta}")
    ry_kernel(state.amps, state.num_qubits, qubit, theta)
    return state


def apply_h(state: StateVector, qubit: int) -> StateVector:
    _check_qubit(state.num_qubits, qubit)
    h_kernel(state.amps, state.num_qubits, qubit)
    return state


def apply_cp_all(state: StateVector, phi: float) -> StateVector:
    """Multiply the ``|1...1>`` amplitude by ``exp(-i phi)``.

    With a single qubit this is the phase gate ``diag(1, exp(-i phi))``.
    """
    cp_all_kernel(state.amps, phi)
    return state


def expect_z(state: StateVector, qubit: int) -> float:
    _check_qubit(state.num_qubits, qubit)
    return float(np.dot(z_signs(state.num_qubits, qubit), state.probabilities()))
