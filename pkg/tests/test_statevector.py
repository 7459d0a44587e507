"""Statevector kernels against definitions and the dense Kronecker oracle."""

import numpy as np
import pytest

from qnnmark.sim import (
    CapacityError,
    Gate,
    GateValidationError,
    Observable,
    ParameterBindingError,
    Statevector,
    apply_gate,
    expectation,
    init_zero_state,
    run_circuit,
)
from qnnmark.sim import dense
from qnnmark.checks import random_circuit, random_observable


class TestInitZeroState:
    def test_one_qubit(self):
        state = init_zero_state(1)
        np.testing.assert_array_equal(state.amplitudes, [1, 0])

    def test_two_qubits(self):
        state = init_zero_state(2)
        np.testing.assert_array_equal(state.amplitudes, [1, 0, 0, 0])

    def test_sixteen_qubits(self):
        state = init_zero_state(16)
        assert state.amplitudes.shape == (65536,)
        assert state.amplitudes[0] == 1.0
        assert np.count_nonzero(state.amplitudes) == 1

    @pytest.mark.parametrize("n", [0, -1, 25])
    def test_capacity_error(self, n):
        with pytest.raises(CapacityError):
            init_zero_state(n)

    def test_configurable_ceiling(self):
        with pytest.raises(CapacityError):
            init_zero_state(5, max_qubits=4)


class TestApplyGate:
    def test_ry_pi_flips_zero_to_one(self):
        state = apply_gate(init_zero_state(1), Gate.ry(0, angle=np.pi))
        np.testing.assert_allclose(state.amplitudes, [0, 1], atol=1e-15)

    def test_h_makes_equal_superposition(self):
        state = apply_gate(init_zero_state(1), Gate.h(0))
        np.testing.assert_allclose(state.amplitudes, [2**-0.5, 2**-0.5], atol=1e-15)

    def test_rz_leaves_probabilities_unchanged(self):
        # phase multiplication cannot move probability between basis states
        rng = np.random.default_rng(3)
        for _ in range(25):
            amps = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            amps /= np.linalg.norm(amps)
            state = Statevector(1, amps)
            theta = float(rng.uniform(-8, 8))
            after = apply_gate(state, Gate.rz(0, angle=theta))
            np.testing.assert_allclose(
                after.probabilities(), state.probabilities(), rtol=0, atol=1e-15
            )

    def test_cx_flips_target_iff_control_set(self):
        # |10> (qubit 1 set) -> |11>
        state = init_zero_state(2)
        state.amplitudes[:] = [0, 0, 1, 0]
        after = apply_gate(state, Gate.cx(1, 0))
        np.testing.assert_array_equal(after.amplitudes, [0, 0, 0, 1])
        # |00> stays put
        after = apply_gate(init_zero_state(2), Gate.cx(1, 0))
        np.testing.assert_array_equal(after.amplitudes, [1, 0, 0, 0])

    def test_input_state_not_mutated(self):
        state = init_zero_state(1)
        apply_gate(state, Gate.h(0))
        np.testing.assert_array_equal(state.amplitudes, [1, 0])

    def test_norm_preserved_over_long_random_circuit(self):
        rng = np.random.default_rng(11)
        state = init_zero_state(4)
        buf = state.amplitudes
        from qnnmark.sim.statevector import apply_inplace

        for _ in range(10_000):
            kind = rng.integers(0, 4)
            q = int(rng.integers(0, 4))
            if kind == 0:
                gate = Gate.h(q)
            elif kind == 1:
                gate = Gate.ry(q, angle=float(rng.uniform(-np.pi, np.pi)))
            elif kind == 2:
                gate = Gate.rz(q, angle=float(rng.uniform(-np.pi, np.pi)))
            else:
                c = int(rng.integers(0, 3))
                gate = Gate.cx(c if c < q else c + 1, q)
            apply_inplace(buf, 4, gate)
        assert abs(np.linalg.norm(buf) - 1.0) <= 1e-10

    def test_validation_errors(self):
        state = init_zero_state(2)
        with pytest.raises(GateValidationError):
            apply_gate(state, Gate.h(2))
        with pytest.raises(GateValidationError):
            apply_gate(state, Gate("CX", 1, control=1))
        with pytest.raises(GateValidationError):
            apply_gate(state, Gate("H", 0, angle=0.3))
        with pytest.raises(GateValidationError):
            apply_gate(state, Gate("RY", 0))  # no angle, no slot
        with pytest.raises(GateValidationError):
            apply_gate(state, Gate("CZ", 0))


class TestDenseOracleAgreement:
    def test_random_circuits_match_dense_matrices(self):
        rng = np.random.default_rng(29)
        for _ in range(80):
            n = int(rng.integers(1, 5))
            gates, params = random_circuit(rng, n, int(rng.integers(1, 21)), 4)
            fast = run_circuit(gates, params, n).amplitudes
            slow = dense.circuit_state(gates, params, n)
            np.testing.assert_allclose(fast, slow, rtol=0, atol=1e-12)


class TestExpectation:
    def test_z_eigenstate(self):
        assert expectation(init_zero_state(1), Observable.single_z(0)) == 1.0

    def test_equal_superposition_is_zero(self):
        state = apply_gate(init_zero_state(1), Gate.ry(0, angle=np.pi / 2))
        assert abs(expectation(state, Observable.single_z(0))) <= 1e-12

    def test_matches_density_matrix_trace(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            amps = rng.standard_normal(8) + 1j * rng.standard_normal(8)
            amps /= np.linalg.norm(amps)
            state = Statevector(3, amps)
            obs = random_observable(rng, 3)
            via_trace = dense.density_matrix_expectation(amps, obs)
            assert abs(expectation(state, obs) - via_trace) <= 1e-12

    def test_bounded_in_unit_interval(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            n = int(rng.integers(1, 5))
            gates, params = random_circuit(rng, n, 12, 3)
            state = run_circuit(gates, params, n)
            val = expectation(state, random_observable(rng, n))
            assert -1.0 <= val <= 1.0

    def test_observable_validation(self):
        with pytest.raises(GateValidationError):
            expectation(init_zero_state(2), Observable.single_z(2))


class TestRunCircuit:
    def test_empty_circuit_is_identity(self):
        state = run_circuit([], [], 2)
        np.testing.assert_array_equal(state.amplitudes, [1, 0, 0, 0])

    def test_bell_state(self):
        state = run_circuit([Gate.h(0), Gate.cx(0, 1)], [], 2)
        np.testing.assert_allclose(state.probabilities(), [0.5, 0, 0, 0.5], atol=1e-15)

    def test_parameterized_angles_read_from_vector(self):
        direct = apply_gate(init_zero_state(1), Gate.ry(0, angle=0.7))
        via_slot = run_circuit([Gate.ry(0, slot=0)], [0.7], 1)
        np.testing.assert_allclose(via_slot.amplitudes, direct.amplitudes, atol=1e-15)

    def test_dangling_slot_is_binding_error(self):
        with pytest.raises(ParameterBindingError):
            run_circuit([Gate.ry(0, slot=3)], [0.1, 0.2], 1)
        with pytest.raises(ParameterBindingError):
            run_circuit([Gate.ry(0, slot=0)], [], 1)
