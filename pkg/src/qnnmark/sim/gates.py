"""Gate and observable descriptions for the statevector simulator.

A gate is a plain record; validation happens when a gate is applied to a
state (or when a circuit is run), not at construction time. Rotation gates
carry either a fixed ``angle`` or a ``parameter_slot`` index into a
parameter vector supplied at run time.
"""
from __future__ import annotations

from dataclasses import dataclass


GATE_KINDS = ("H", "RY", "RZ", "CX")
ROTATION_KINDS = ("RY", "RZ")


class GateValidationError(ValueError):
    """Gate field combination or qubit index is invalid for the target state."""


class ParameterBindingError(ValueError):
    """A gate references a parameter slot that the parameter vector lacks."""


@dataclass(frozen=True)
class Gate:
    kind: str
    target: int
    control: int | None = None
    angle: float | None = None
    parameter_slot: int | None = None

    @staticmethod
    def h(target: int) -> "Gate":
        return Gate("H", target)

    @staticmethod
    def ry(target: int, angle: float | None = None, slot: int | None = None) -> "Gate":
        return Gate("RY", target, angle=angle, parameter_slot=slot)

    @staticmethod
    def rz(target: int, angle: float | None = None, slot: int | None = None) -> "Gate":
        return Gate("RZ", target, angle=angle, parameter_slot=slot)

    @staticmethod
    def cx(control: int, target: int) -> "Gate":
        return Gate("CX", target, control=control)


def validate_gate(gate: Gate, n_qubits: int) -> None:
    """Check field consistency and index ranges; raise GateValidationError."""
    if gate.kind not in GATE_KINDS:
        raise GateValidationError(f"unknown gate kind {gate.kind!r}")
    if not 0 <= gate.target < n_qubits:
        raise GateValidationError(
            f"target {gate.target} out of range for {n_qubits} qubits"
        )
    if gate.kind == "CX":
        if gate.control is None:
            raise GateValidationError("CX requires a control qubit")
        if not 0 <= gate.control < n_qubits:
            raise GateValidationError(
                f"control {gate.control} out of range for {n_qubits} qubits"
            )
        if gate.control == gate.target:
            raise GateValidationError("CX control and target must differ")
    elif gate.control is not None:
        raise GateValidationError(f"{gate.kind} does not take a control qubit")
    if gate.kind in ROTATION_KINDS:
        if gate.angle is None and gate.parameter_slot is None:
            raise GateValidationError(f"{gate.kind} needs an angle or a parameter slot")
    else:
        if gate.angle is not None:
            raise GateValidationError(f"{gate.kind} does not take an angle")


def resolve_angle(gate: Gate, params) -> float:
    """Return the gate's effective angle, reading parameterized gates from params."""
    if gate.parameter_slot is not None:
        n = 0 if params is None else len(params)
        if not 0 <= gate.parameter_slot < n:
            raise ParameterBindingError(
                f"gate references parameter slot {gate.parameter_slot} "
                f"but only {n} parameters were supplied"
            )
        return float(params[gate.parameter_slot])
    if gate.angle is None:
        raise ParameterBindingError(f"{gate.kind} gate has no bound angle")
    return float(gate.angle)


@dataclass(frozen=True)
class Observable:
    """Measured operator: Z on one qubit, or the Z-parity of all qubits."""

    kind: str  # "z" | "parity"
    qubit: int | None = None

    @staticmethod
    def single_z(qubit: int) -> "Observable":
        return Observable("z", qubit)

    @staticmethod
    def parity() -> "Observable":
        return Observable("parity")


def validate_observable(obs: Observable, n_qubits: int) -> None:
    if obs.kind == "z":
        if obs.qubit is None or not 0 <= obs.qubit < n_qubits:
            raise GateValidationError(
                f"observable qubit {obs.qubit} out of range for {n_qubits} qubits"
            )
    elif obs.kind == "parity":
        if obs.qubit is not None:
            raise GateValidationError("parity observable takes no qubit index")
    else:
        raise GateValidationError(f"unknown observable kind {obs.kind!r}")
