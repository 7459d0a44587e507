"""Dense statevector simulation of n-qubit pure states.

Layout: amplitudes live in a flat complex128 array indexed by the
computational-basis integer, with qubit 0 as the least significant bit.

Gate kernels mutate a working buffer in place with stride-2^k pair sweeps;
the public functions keep a value-in/value-out contract. Whole circuits
are first "compiled" to flat opcode/coefficient arrays (validating every
gate and binding every parameter slot once), then executed by a single
jitted sweep with no per-gate Python overhead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .gates import (
    Gate,
    Observable,
    resolve_angle,
    validate_gate,
    validate_observable,
)

MAX_QUBITS = 24

_SQRT2_INV = 1.0 / math.sqrt(2.0)

_OP_1Q = 0  # generic 2x2 on a target qubit
_OP_DIAG = 1  # diagonal 2x2 on a target qubit
_OP_CX = 2


class CapacityError(ValueError):
    """Requested qubit count is outside the supported range."""


@dataclass
class Statevector:
    n_qubits: int
    amplitudes: np.ndarray

    def copy(self) -> "Statevector":
        return Statevector(self.n_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        a = self.amplitudes
        return a.real * a.real + a.imag * a.imag


def _zero_amplitudes(n_qubits: int) -> np.ndarray:
    # np.empty + fill touches the pages up front, which is measurably
    # cheaper than faulting lazily inside the gate kernels
    amps = np.empty(1 << n_qubits, dtype=np.complex128)
    amps.fill(0.0)
    amps[0] = 1.0
    return amps


def init_zero_state(n_qubits: int, max_qubits: int = MAX_QUBITS) -> Statevector:
    """Prepare the all-zeros basis state on ``n_qubits`` qubits."""
    if not 1 <= n_qubits <= max_qubits:
        raise CapacityError(
            f"n_qubits={n_qubits} outside supported range [1, {max_qubits}]"
        )
    return Statevector(n_qubits, _zero_amplitudes(n_qubits))


# --- jitted kernels ---------------------------------------------------------

@njit(cache=True, fastmath=True)
def _kernel_1q(buf, k, m00, m01, m10, m11):  # pragma: no cover - jitted
    step = 1 << k
    block = step << 1
    for base in range(0, buf.shape[0], block):
        for i in range(base, base + step):
            j = i + step
            a = buf[i]
            b = buf[j]
            buf[i] = m00 * a + m01 * b
            buf[j] = m10 * a + m11 * b


@njit(cache=True, fastmath=True)
def _kernel_diag(buf, k, d0, d1):  # pragma: no cover - jitted
    step = 1 << k
    block = step << 1
    for base in range(0, buf.shape[0], block):
        for i in range(base, base + step):
            buf[i] = buf[i] * d0
            buf[i + step] = buf[i + step] * d1


@njit(cache=True, fastmath=True)
def _kernel_cx(buf, control, target):  # pragma: no cover - jitted
    lo = control if control < target else target
    hi = target if control < target else control
    lo_mask = (1 << lo) - 1
    hi_mask = (1 << hi) - 1
    control_bit = 1 << control
    target_bit = 1 << target
    for t in range(buf.shape[0] >> 2):
        i = ((t & ~lo_mask) << 1) | (t & lo_mask)
        i = ((i & ~hi_mask) << 1) | (i & hi_mask)
        i |= control_bit
        j = i | target_bit
        tmp = buf[i]
        buf[i] = buf[j]
        buf[j] = tmp


@njit(cache=True, fastmath=True)
def _exec_plan(buf, ops, targets, controls, coeffs):  # pragma: no cover - jitted
    for g in range(ops.shape[0]):
        op = ops[g]
        if op == _OP_1Q:
            _kernel_1q(buf, targets[g], coeffs[g, 0], coeffs[g, 1],
                       coeffs[g, 2], coeffs[g, 3])
        elif op == _OP_DIAG:
            _kernel_diag(buf, targets[g], coeffs[g, 0], coeffs[g, 1])
        else:
            _kernel_cx(buf, controls[g], targets[g])


@njit(cache=True, fastmath=True)
def _bilinear_1q(bra, ket, k, m00, m01, m10, m11):  # pragma: no cover - jitted
    # 2 Re <bra| M |ket> for a 2x2 M acting on qubit k
    step = 1 << k
    block = step << 1
    acc = 0.0
    for base in range(0, bra.shape[0], block):
        for i in range(base, base + step):
            j = i + step
            ti = m00 * ket[i] + m01 * ket[j]
            tj = m10 * ket[i] + m11 * ket[j]
            acc += (
                bra[i].real * ti.real
                + bra[i].imag * ti.imag
                + bra[j].real * tj.real
                + bra[j].imag * tj.imag
            )
    return 2.0 * acc


@njit(cache=True, fastmath=True)
def _adjoint_sweep(
    ket, bra, ops, targets, controls, inv_coeffs, deriv_coeffs, slots, grad
):  # pragma: no cover - jitted
    for g in range(ops.shape[0] - 1, -1, -1):
        op = ops[g]
        k = targets[g]
        if op == _OP_1Q:
            _kernel_1q(ket, k, inv_coeffs[g, 0], inv_coeffs[g, 1],
                       inv_coeffs[g, 2], inv_coeffs[g, 3])
        elif op == _OP_DIAG:
            _kernel_diag(ket, k, inv_coeffs[g, 0], inv_coeffs[g, 1])
        else:
            _kernel_cx(ket, controls[g], k)
        slot = slots[g]
        if slot >= 0:
            if op == _OP_DIAG:
                # diagonal derivative: only two scalars are non-zero
                step = 1 << k
                block = step << 1
                acc = 0.0
                d0 = deriv_coeffs[g, 0]
                d1 = deriv_coeffs[g, 1]
                for base in range(0, bra.shape[0], block):
                    for i in range(base, base + step):
                        j = i + step
                        ti = d0 * ket[i]
                        tj = d1 * ket[j]
                        acc += (
                            bra[i].real * ti.real
                            + bra[i].imag * ti.imag
                            + bra[j].real * tj.real
                            + bra[j].imag * tj.imag
                        )
                grad[slot] += 2.0 * acc
            else:
                grad[slot] += _bilinear_1q(
                    bra, ket, k, deriv_coeffs[g, 0], deriv_coeffs[g, 1],
                    deriv_coeffs[g, 2], deriv_coeffs[g, 3],
                )
        if op == _OP_1Q:
            _kernel_1q(bra, k, inv_coeffs[g, 0], inv_coeffs[g, 1],
                       inv_coeffs[g, 2], inv_coeffs[g, 3])
        elif op == _OP_DIAG:
            _kernel_diag(bra, k, inv_coeffs[g, 0], inv_coeffs[g, 1])
        else:
            _kernel_cx(bra, controls[g], k)


@njit(cache=True, fastmath=True)
def _kernel_z_expectation(buf, k):  # pragma: no cover - jitted
    step = 1 << k
    block = step << 1
    acc = 0.0
    for base in range(0, buf.shape[0], block):
        for i in range(base, base + step):
            a = buf[i]
            b = buf[i + step]
            acc += (a.real * a.real + a.imag * a.imag) - (
                b.real * b.real + b.imag * b.imag
            )
    return acc


@njit(cache=True, fastmath=True)
def _kernel_parity_expectation(buf):  # pragma: no cover - jitted
    acc = 0.0
    for i in range(buf.shape[0]):
        bits = i
        bits ^= bits >> 16
        bits ^= bits >> 8
        bits ^= bits >> 4
        bits ^= bits >> 2
        bits ^= bits >> 1
        p = buf[i].real * buf[i].real + buf[i].imag * buf[i].imag
        acc += -p if bits & 1 else p
    return acc


@njit(cache=True, fastmath=True)
def _kernel_parity_sign(buf):  # pragma: no cover - jitted
    for i in range(buf.shape[0]):
        bits = i
        bits ^= bits >> 16
        bits ^= bits >> 8
        bits ^= bits >> 4
        bits ^= bits >> 2
        bits ^= bits >> 1
        if bits & 1:
            buf[i] = -buf[i]


# --- circuit compilation ----------------------------------------------------

def _rotation_coefficients(kind: str, angle: float):
    """2x2 entries of a rotation gate. RZ returns its diagonal in the first
    two entries. Split out so tests can inject kernel perturbations."""
    half = 0.5 * angle
    if kind == "RY":
        c, s = math.cos(half), math.sin(half)
        return complex(c), complex(-s), complex(s), complex(c)
    return np.exp(-1j * half), np.exp(1j * half), 0j, 0j


def _derivative_coefficients(kind: str, angle: float):
    """Entries of dU/dangle; RZ diagonal again in the first two entries."""
    half = 0.5 * angle
    if kind == "RY":
        c, s = 0.5 * math.cos(half), 0.5 * math.sin(half)
        return complex(-s), complex(-c), complex(c), complex(-s)
    return -0.5j * np.exp(-1j * half), 0.5j * np.exp(1j * half), 0j, 0j


class _Plan:
    """Validated, fully bound circuit ready for the jitted executors."""

    __slots__ = ("n_qubits", "ops", "targets", "controls", "slots", "coeffs",
                 "inv_coeffs", "deriv_coeffs")

    def __init__(self, gates, params, n_qubits: int, for_gradient: bool):
        m = len(gates)
        self.n_qubits = n_qubits
        self.ops = np.empty(m, dtype=np.int32)
        self.targets = np.empty(m, dtype=np.int32)
        self.controls = np.full(m, -1, dtype=np.int32)
        self.slots = np.full(m, -1, dtype=np.int32)
        self.coeffs = np.zeros((m, 4), dtype=np.complex128)
        self.inv_coeffs = np.zeros((m, 4), dtype=np.complex128) if for_gradient else None
        self.deriv_coeffs = (
            np.zeros((m, 4), dtype=np.complex128) if for_gradient else None
        )
        h = complex(_SQRT2_INV)
        for g, gate in enumerate(gates):
            validate_gate(gate, n_qubits)
            self.targets[g] = gate.target
            if gate.kind == "H":
                self.ops[g] = _OP_1Q
                self.coeffs[g] = (h, h, h, -h)
                if for_gradient:
                    self.inv_coeffs[g] = self.coeffs[g]
            elif gate.kind == "CX":
                self.ops[g] = _OP_CX
                self.controls[g] = gate.control
            else:
                self.ops[g] = _OP_DIAG if gate.kind == "RZ" else _OP_1Q
                angle = resolve_angle(gate, params)
                self.coeffs[g] = _rotation_coefficients(gate.kind, angle)
                if gate.parameter_slot is not None:
                    self.slots[g] = gate.parameter_slot
                if for_gradient:
                    self.inv_coeffs[g] = _rotation_coefficients(gate.kind, -angle)
                    self.deriv_coeffs[g] = _derivative_coefficients(gate.kind, angle)


def apply_inplace(buf: np.ndarray, n_qubits: int, gate: Gate, params=None) -> None:
    """Apply one validated gate to a working buffer, mutating it."""
    validate_gate(gate, n_qubits)
    if gate.kind == "H":
        s = complex(_SQRT2_INV)
        _kernel_1q(buf, gate.target, s, s, s, -s)
    elif gate.kind == "CX":
        _kernel_cx(buf, gate.control, gate.target)
    else:
        angle = resolve_angle(gate, params)
        a, b, c, d = _rotation_coefficients(gate.kind, angle)
        if gate.kind == "RZ":
            _kernel_diag(buf, gate.target, a, b)
        else:
            _kernel_1q(buf, gate.target, a, b, c, d)


def apply_gate(state: Statevector, gate: Gate, params=None) -> Statevector:
    """Return the state transformed by one gate."""
    out = state.copy()
    apply_inplace(out.amplitudes, out.n_qubits, gate, params)
    return out


def run_circuit(gates, params, n_qubits: int) -> Statevector:
    """Apply a gate sequence to the zero state, angles bound from ``params``."""
    state = init_zero_state(n_qubits)
    plan = _Plan(list(gates), params, n_qubits, for_gradient=False)
    _exec_plan(state.amplitudes, plan.ops, plan.targets, plan.controls, plan.coeffs)
    return state


def expectation(state: Statevector, obs: Observable) -> float:
    """Expectation value of a Z-type observable; always within [-1, 1]."""
    validate_observable(obs, state.n_qubits)
    if obs.kind == "z":
        val = _kernel_z_expectation(state.amplitudes, obs.qubit)
    else:
        val = _kernel_parity_expectation(state.amplitudes)
    # clamp float roundoff at the boundary
    return float(min(1.0, max(-1.0, val)))


def apply_observable_inplace(buf: np.ndarray, n_qubits: int, obs: Observable) -> None:
    """Multiply the buffer by the observable matrix (diagonal for Z types)."""
    validate_observable(obs, n_qubits)
    if obs.kind == "z":
        _kernel_diag(buf, obs.qubit, complex(1.0), complex(-1.0))
    else:
        _kernel_parity_sign(buf)
