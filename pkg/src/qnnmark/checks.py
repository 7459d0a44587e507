"""Self-check suite: gate kernels against dense linear algebra, and the
three gradient routes (adjoint, parameter shift, finite differences)
against each other. Used by the command-line ``gradcheck`` and reused by
the test suite."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ansatz import AnsatzSpec
from .model import HybridModel
from .sim import dense
from .sim.gates import Gate, Observable
from .sim.gradients import (
    adjoint_gradient,
    finite_difference_gradient,
    parameter_shift_gradient,
)
from .sim.statevector import run_circuit


@dataclass
class CheckResult:
    name: str
    max_error: float
    tolerance: float
    passed: bool


def random_circuit(
    rng: np.random.Generator, n_qubits: int, n_gates: int, n_params: int
) -> tuple[list[Gate], np.ndarray]:
    """Random circuit over the supported gate set; every parameter slot that
    exists is wired to at least one rotation when gate count allows."""
    gates: list[Gate] = []
    next_slot = 0
    for _ in range(n_gates):
        kinds = ["H", "RY", "RZ", "CX"] if n_qubits > 1 else ["H", "RY", "RZ"]
        kind = str(rng.choice(kinds))
        target = int(rng.integers(0, n_qubits))
        if kind == "H":
            gates.append(Gate.h(target))
        elif kind == "CX":
            control = int(rng.integers(0, n_qubits - 1))
            if control >= target:
                control += 1
            gates.append(Gate.cx(control, target))
        elif next_slot < n_params:
            gates.append(Gate(kind, target, parameter_slot=next_slot))
            next_slot += 1
        elif n_params > 0 and rng.random() < 0.5:
            # occasionally reuse a slot to exercise gradient accumulation
            gates.append(Gate(kind, target, parameter_slot=int(rng.integers(0, n_params))))
        else:
            gates.append(Gate(kind, target, angle=float(rng.uniform(-np.pi, np.pi))))
    params = rng.uniform(-np.pi, np.pi, size=n_params)
    return gates, params


def random_observable(rng: np.random.Generator, n_qubits: int) -> Observable:
    if rng.random() < 0.8:
        return Observable.single_z(int(rng.integers(0, n_qubits)))
    return Observable.parity()


def check_kernels_against_dense(seed: int, n_circuits: int = 60) -> CheckResult:
    """Statevector kernels vs explicit Kronecker-product unitaries."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_circuits):
        n = int(rng.integers(1, 5))
        gates, params = random_circuit(rng, n, int(rng.integers(1, 21)), 4)
        fast = run_circuit(gates, params, n).amplitudes
        slow = dense.circuit_state(gates, params, n)
        worst = max(worst, float(np.max(np.abs(fast - slow))))
    return CheckResult("gate-kernels-vs-dense", worst, 1e-12, worst <= 1e-12)


def check_adjoint_against_shift(seed: int, n_circuits: int = 40) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_circuits):
        n = int(rng.integers(1, 7))
        n_params = int(rng.integers(1, 9))
        gates, params = random_circuit(rng, n, int(rng.integers(4, 41)), n_params)
        obs = random_observable(rng, n)
        adj = adjoint_gradient(gates, params, obs, n)
        shift = parameter_shift_gradient(gates, params, obs, n)
        worst = max(worst, float(np.max(np.abs(adj - shift))))
    return CheckResult("adjoint-vs-parameter-shift", worst, 1e-9, worst <= 1e-9)


def check_gradients_against_fd(seed: int, n_circuits: int = 20) -> CheckResult:
    """Both analytic engines vs central differences (rtol 1e-5, atol 1e-8)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    ok = True
    for _ in range(n_circuits):
        n = int(rng.integers(1, 7))
        n_params = int(rng.integers(1, 7))
        gates, params = random_circuit(rng, n, int(rng.integers(4, 31)), n_params)
        obs = random_observable(rng, n)
        fd = finite_difference_gradient(gates, params, obs, n)
        for engine in (adjoint_gradient, parameter_shift_gradient):
            grad = engine(gates, params, obs, n)
            worst = max(worst, float(np.max(np.abs(grad - fd))))
            ok = ok and np.allclose(grad, fd, rtol=1e-5, atol=1e-8)
    return CheckResult("analytic-vs-finite-difference", worst, 1e-5, ok)


def model_loss_fd_gradient(model: HybridModel, image, label, step: float = 1e-5):
    """Central-difference gradient of the per-sample BCE loss over every
    parameter array (oracle for the end-to-end chain)."""
    from .nn import bce_loss

    def loss_value():
        return bce_loss(model.predict_proba(image), label)[0]

    grads = []
    for arr in model.parameters():
        g = np.zeros_like(arr)
        flat = arr.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + step
            up = loss_value()
            flat[i] = original - step
            down = loss_value()
            flat[i] = original
            gflat[i] = (up - down) / (2 * step)
        grads.append(g)
    return grads


def check_hybrid_end_to_end(seed: int) -> CheckResult:
    """Analytic model gradient vs finite differences on a shrunken model."""
    rng = np.random.default_rng(seed)
    spec = AnsatzSpec(n_qubits=3, reps=1)
    model = HybridModel.initialize(6, spec, seed)
    image = rng.uniform(0.0, 1.0, size=6)
    label = int(rng.integers(0, 2))
    _, analytic = model._loss_and_gradients(image, label)
    fd = model_loss_fd_gradient(model, image, label)
    worst = 0.0
    ok = True
    for a, f in zip(analytic, fd):
        worst = max(worst, float(np.max(np.abs(a - f))))
        ok = ok and np.allclose(a, f, rtol=1e-4, atol=1e-8)
    return CheckResult("hybrid-end-to-end-vs-fd", worst, 1e-4, ok)


def gradient_check_suite(seed: int) -> list[CheckResult]:
    return [
        check_kernels_against_dense(seed),
        check_adjoint_against_shift(seed + 1),
        check_gradients_against_fd(seed + 2),
        check_hybrid_end_to_end(seed + 3),
    ]
