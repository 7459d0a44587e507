"""The quantum hidden layer: a fixed circuit template with trainable angles.

Topology: an encoding layer (H then RZ(x_j) on every qubit, one input slot
per qubit) followed by ``reps`` variational blocks, each an RY(theta) per
qubit plus a linear CX chain. Trainable parameter count is therefore
``reps * n_qubits``; the layer maps an n_qubits-dimensional real input to
one expectation value in [-1, 1], differentiable in both the inputs and
the trainable angles.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sim.gates import Gate, Observable, validate_observable
from .sim.gradients import adjoint_value_and_gradient, circuit_expectation


@dataclass(frozen=True)
class AnsatzSpec:
    n_qubits: int = 16
    reps: int = 2
    entangler: str = "linear"
    observable: Observable = field(default_factory=lambda: Observable.single_z(0))

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        if self.reps < 1:
            raise ValueError("reps must be positive")
        if self.entangler != "linear":
            raise ValueError(f"unsupported entangler {self.entangler!r}")
        validate_observable(self.observable, self.n_qubits)

    @property
    def n_inputs(self) -> int:
        return self.n_qubits

    @property
    def n_trainable(self) -> int:
        return self.reps * self.n_qubits

    @property
    def n_slots(self) -> int:
        return self.n_inputs + self.n_trainable


def build_ansatz(spec: AnsatzSpec) -> list[Gate]:
    """Gate list for the template. Slots 0..n-1 are inputs, the rest trainable."""
    n = spec.n_qubits
    gates: list[Gate] = []
    for q in range(n):
        gates.append(Gate.h(q))
    for q in range(n):
        gates.append(Gate.rz(q, slot=q))
    slot = n
    for _ in range(spec.reps):
        for q in range(n):
            gates.append(Gate.ry(q, slot=slot))
            slot += 1
        for q in range(n - 1):
            gates.append(Gate.cx(q, q + 1))
    return gates


@dataclass
class QuantumLayerOutput:
    value: float
    grad_inputs: np.ndarray
    grad_params: np.ndarray


class QuantumLayer:
    """Callable wrapper that caches the gate list of one AnsatzSpec."""

    def __init__(self, spec: AnsatzSpec):
        self.spec = spec
        self.gates = build_ansatz(spec)

    def _pack(self, x, theta) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        theta = np.asarray(theta, dtype=np.float64)
        if x.shape != (self.spec.n_inputs,):
            raise ValueError(
                f"input must have shape ({self.spec.n_inputs},), got {x.shape}"
            )
        if theta.shape != (self.spec.n_trainable,):
            raise ValueError(
                f"trainable angles must have shape ({self.spec.n_trainable},), "
                f"got {theta.shape}"
            )
        return np.concatenate([x, theta])

    def forward(self, x, theta) -> float:
        params = self._pack(x, theta)
        return circuit_expectation(
            self.gates, params, self.spec.observable, self.spec.n_qubits
        )

    def backward(self, x, theta) -> QuantumLayerOutput:
        """Value plus gradients w.r.t. inputs and trainable angles (adjoint sweep)."""
        params = self._pack(x, theta)
        value, grad = adjoint_value_and_gradient(
            self.gates, params, self.spec.observable, self.spec.n_qubits
        )
        n = self.spec.n_inputs
        return QuantumLayerOutput(value, grad[:n].copy(), grad[n:].copy())
