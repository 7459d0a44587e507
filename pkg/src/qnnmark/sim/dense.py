"""Dense-matrix circuit evaluation built from explicit Kronecker products.

Exponentially sized and deliberately naive: this path exists to check the
stride kernels and gradient engines against textbook linear algebra, and
is kept independent of the kernel implementations. Usable up to ~12 qubits.
"""
from __future__ import annotations

import numpy as np

from .gates import Gate, Observable, resolve_angle, validate_gate, validate_observable

_I2 = np.eye(2, dtype=np.complex128)
_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
_H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
_P0 = np.array([[1, 0], [0, 0]], dtype=np.complex128)
_P1 = np.array([[0, 0], [0, 1]], dtype=np.complex128)


def rotation_matrix(kind: str, angle: float) -> np.ndarray:
    half = 0.5 * angle
    if kind == "RY":
        c, s = np.cos(half), np.sin(half)
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    if kind == "RZ":
        return np.array(
            [[np.exp(-1j * half), 0], [0, np.exp(1j * half)]], dtype=np.complex128
        )
    raise ValueError(f"not a rotation kind: {kind!r}")


def _kron_chain(single_qubit_ops: list[np.ndarray]) -> np.ndarray:
    # qubit 0 is the least significant bit, so it sits rightmost in the chain
    full = single_qubit_ops[-1]
    for op in reversed(single_qubit_ops[:-1]):
        full = np.kron(full, op)
    return full


def _placed(op: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    ops = [_I2] * n_qubits
    ops[qubit] = op
    return _kron_chain(ops)


def gate_unitary(gate: Gate, n_qubits: int, params=None) -> np.ndarray:
    """Full 2^n x 2^n unitary of one gate."""
    validate_gate(gate, n_qubits)
    if gate.kind == "H":
        return _placed(_H, gate.target, n_qubits)
    if gate.kind == "CX":
        off = [_I2] * n_qubits
        off[gate.control] = _P0
        on = [_I2] * n_qubits
        on[gate.control] = _P1
        on[gate.target] = _X
        return _kron_chain(off) + _kron_chain(on)
    angle = resolve_angle(gate, params)
    return _placed(rotation_matrix(gate.kind, angle), gate.target, n_qubits)


def circuit_unitary(gates, params, n_qubits: int) -> np.ndarray:
    """Ordered product of the gate unitaries."""
    full = np.eye(1 << n_qubits, dtype=np.complex128)
    for gate in gates:
        full = gate_unitary(gate, n_qubits, params) @ full
    return full


def observable_matrix(obs: Observable, n_qubits: int) -> np.ndarray:
    validate_observable(obs, n_qubits)
    if obs.kind == "z":
        return _placed(_Z, obs.qubit, n_qubits)
    return _kron_chain([_Z] * n_qubits)


def circuit_state(gates, params, n_qubits: int) -> np.ndarray:
    """Amplitudes of the circuit output, via the dense unitary."""
    zero = np.zeros(1 << n_qubits, dtype=np.complex128)
    zero[0] = 1.0
    return circuit_unitary(gates, params, n_qubits) @ zero


def density_matrix_expectation(amplitudes: np.ndarray, obs: Observable) -> float:
    """tr(rho O) with rho built explicitly from the amplitudes."""
    n_qubits = int(np.log2(len(amplitudes)))
    rho = np.outer(amplitudes, amplitudes.conj())
    return float(np.trace(rho @ observable_matrix(obs, n_qubits)).real)
