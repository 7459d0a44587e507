"""Gradient engines against each other, finite differences, and analytics."""

import numpy as np
import pytest

from qnnmark.sim import (
    Gate,
    Observable,
    adjoint_gradient,
    adjoint_value_and_gradient,
    circuit_expectation,
    finite_difference_gradient,
    parameter_shift_gradient,
    UnsupportedGeneratorError,
)
from qnnmark.ansatz import AnsatzSpec, build_ansatz
from qnnmark.checks import random_circuit, random_observable

Z0 = Observable.single_z(0)


class TestParameterShift:
    def test_stationary_point_of_cosine(self):
        # single RY, <Z0> = cos(theta): derivative at 0 is 0
        grad = parameter_shift_gradient([Gate.ry(0, slot=0)], [0.0], Z0, 1)
        assert grad.shape == (1,)
        assert abs(grad[0]) <= 1e-15

    def test_analytic_slope_at_quarter_turn(self):
        grad = parameter_shift_gradient([Gate.ry(0, slot=0)], [np.pi / 2], Z0, 1)
        assert abs(grad[0] - (-1.0)) <= 1e-12

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(23)
        for _ in range(15):
            gates, params = random_circuit(rng, 4, int(rng.integers(6, 25)), 5)
            obs = random_observable(rng, 4)
            shift = parameter_shift_gradient(gates, params, obs, 4)
            fd = finite_difference_gradient(gates, params, obs, 4)
            np.testing.assert_allclose(shift, fd, rtol=1e-5, atol=1e-8)


class TestAdjoint:
    def test_agrees_with_parameter_shift(self):
        rng = np.random.default_rng(31)
        for _ in range(60):
            n = int(rng.integers(1, 7))
            gates, params = random_circuit(
                rng, n, int(rng.integers(4, 41)), int(rng.integers(1, 9))
            )
            obs = random_observable(rng, n)
            adj = adjoint_gradient(gates, params, obs, n)
            shift = parameter_shift_gradient(gates, params, obs, n)
            np.testing.assert_allclose(adj, shift, rtol=0, atol=1e-9)

    def test_zero_parameter_circuit_gives_empty_gradient(self):
        grad = adjoint_gradient([Gate.h(0), Gate.cx(0, 1)], [], Z0, 2)
        assert grad.shape == (0,)

    def test_value_matches_expectation(self):
        rng = np.random.default_rng(37)
        gates, params = random_circuit(rng, 3, 15, 4)
        value, _ = adjoint_value_and_gradient(gates, params, Z0, 3)
        assert abs(value - circuit_expectation(gates, params, Z0, 3)) <= 1e-12

    def test_full_size_ansatz_gradient_in_one_pass(self):
        spec = AnsatzSpec(n_qubits=16, reps=2)
        gates = build_ansatz(spec)
        rng = np.random.default_rng(41)
        params = rng.uniform(-np.pi, np.pi, spec.n_slots)
        adj = adjoint_gradient(gates, params, Z0, 16)
        assert adj.shape == (48,)
        shift = parameter_shift_gradient(gates, params, Z0, 16)
        np.testing.assert_allclose(adj, shift, rtol=0, atol=1e-9)

    def test_shared_slot_accumulates(self):
        # two RY gates driven by one slot: d<Z>/dt of RY(t)RY(t)|0> = -2 sin(2t)
        gates = [Gate.ry(0, slot=0), Gate.ry(0, slot=0)]
        theta = 0.3
        for engine in (adjoint_gradient, parameter_shift_gradient):
            grad = engine(gates, [theta], Z0, 1)
            assert abs(grad[0] - (-2 * np.sin(2 * theta))) <= 1e-12

    def test_unsupported_generator(self):
        bad = Gate("H", 0, parameter_slot=0)
        with pytest.raises(UnsupportedGeneratorError):
            adjoint_gradient([bad], [0.1], Z0, 1)
        with pytest.raises(UnsupportedGeneratorError):
            parameter_shift_gradient([bad], [0.1], Z0, 1)


class TestFiniteDifferenceOracleAgreement:
    def test_both_engines_match_fd_on_random_instances(self):
        rng = np.random.default_rng(43)
        for _ in range(15):
            n = int(rng.integers(2, 7))
            gates, params = random_circuit(
                rng, n, int(rng.integers(6, 31)), int(rng.integers(1, 7))
            )
            obs = random_observable(rng, n)
            fd = finite_difference_gradient(gates, params, obs, n)
            for engine in (adjoint_gradient, parameter_shift_gradient):
                np.testing.assert_allclose(
                    engine(gates, params, obs, n), fd, rtol=1e-5, atol=1e-8
                )
