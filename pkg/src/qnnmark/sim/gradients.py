"""Gradient engines for circuit expectation values.

Two routes with very different cost profiles:

* ``parameter_shift_gradient`` evaluates the circuit at angle +/- pi/2 per
  parameterized gate occurrence. Exact for RY/RZ (generator eigenvalues
  +/- 1/2), costs O(#params * #gates).
* ``adjoint_gradient`` runs one forward sweep, then walks the circuit
  backwards keeping a bra/ket pair, inserting the gate derivative at each
  parameterized position: d<O>/dtheta = 2 Re <bra| dU/dtheta |ket>.
  Costs O(#gates) and must agree with the shift rule to 1e-9.

Gradients are returned as one real entry per parameter slot; if several
gates share a slot their contributions accumulate (chain rule).
"""
from __future__ import annotations

import math

import numpy as np

from .gates import Gate, Observable, resolve_angle, validate_observable
from .statevector import (
    _adjoint_sweep,
    _exec_plan,
    _Plan,
    _zero_amplitudes,
    apply_observable_inplace,
    expectation,
    run_circuit,
)


class UnsupportedGeneratorError(ValueError):
    """A parameterized gate is not an RY/RZ rotation."""


def _check_parameterized(gates) -> list[int]:
    """Indices of parameterized gates, validating their kinds."""
    out = []
    for i, gate in enumerate(gates):
        if gate.parameter_slot is None:
            continue
        if gate.kind not in ("RY", "RZ"):
            raise UnsupportedGeneratorError(
                f"cannot differentiate parameterized {gate.kind} gate"
            )
        out.append(i)
    return out


def circuit_expectation(gates, params, obs: Observable, n_qubits: int) -> float:
    """Expectation of ``obs`` on the circuit output state."""
    return expectation(run_circuit(gates, params, n_qubits), obs)


def parameter_shift_gradient(gates, params, obs: Observable, n_qubits: int) -> np.ndarray:
    """Exact gradient by the +/- pi/2 shift rule, one circuit pair per gate."""
    gates = list(gates)
    param_positions = _check_parameterized(gates)
    grad = np.zeros(len(params), dtype=np.float64)
    for i in param_positions:
        gate = gates[i]
        slot = gate.parameter_slot
        angle = resolve_angle(gate, params)
        plus = Gate(gate.kind, gate.target, angle=angle + math.pi / 2)
        minus = Gate(gate.kind, gate.target, angle=angle - math.pi / 2)
        e_plus = circuit_expectation(
            gates[:i] + [plus] + gates[i + 1 :], params, obs, n_qubits
        )
        e_minus = circuit_expectation(
            gates[:i] + [minus] + gates[i + 1 :], params, obs, n_qubits
        )
        grad[slot] += 0.5 * (e_plus - e_minus)
    return grad


def adjoint_value_and_gradient(
    gates, params, obs: Observable, n_qubits: int
) -> tuple[float, np.ndarray]:
    """Expectation and its gradient from one forward plus one backward sweep."""
    gates = list(gates)
    _check_parameterized(gates)
    validate_observable(obs, n_qubits)
    plan = _Plan(gates, params, n_qubits, for_gradient=True)

    ket = _zero_amplitudes(n_qubits)
    _exec_plan(ket, plan.ops, plan.targets, plan.controls, plan.coeffs)
    bra = ket.copy()
    apply_observable_inplace(bra, n_qubits, obs)
    value = float(np.vdot(ket, bra).real)

    grad = np.zeros(len(params), dtype=np.float64)
    _adjoint_sweep(
        ket,
        bra,
        plan.ops,
        plan.targets,
        plan.controls,
        plan.inv_coeffs,
        plan.deriv_coeffs,
        plan.slots,
        grad,
    )
    return value, grad


def adjoint_gradient(gates, params, obs: Observable, n_qubits: int) -> np.ndarray:
    """Gradient from one forward sweep plus one backward bra/ket sweep."""
    return adjoint_value_and_gradient(gates, params, obs, n_qubits)[1]


def finite_difference_gradient(
    gates, params, obs: Observable, n_qubits: int, step: float = 1e-5
) -> np.ndarray:
    """Central-difference gradient over the parameter vector (test oracle)."""
    params = np.asarray(params, dtype=np.float64)
    grad = np.zeros(len(params), dtype=np.float64)
    for i in range(len(params)):
        bumped = params.copy()
        bumped[i] += step
        e_plus = circuit_expectation(gates, bumped, obs, n_qubits)
        bumped[i] -= 2 * step
        e_minus = circuit_expectation(gates, bumped, obs, n_qubits)
        grad[i] = (e_plus - e_minus) / (2 * step)
    return grad
