"""Dense layer, activations, BCE, and Adam against hand math and FD."""

import math

import numpy as np
import pytest

from qnnmark.nn import (
    Adam,
    DenseLayer,
    bce_loss,
    dense_backward,
    dense_forward,
    scale_by_pi,
    sigmoid_backward,
    sigmoid_forward,
    tanh_backward,
    tanh_forward,
)


class TestDense:
    def test_identity_layer(self):
        layer = DenseLayer(np.eye(3), np.zeros(3))
        x = np.array([0.5, -1.0, 2.0])
        np.testing.assert_array_equal(dense_forward(layer, x), x)

    def test_gradients_match_finite_differences(self):
        rng = np.random.default_rng(2)
        layer = DenseLayer(rng.standard_normal((8, 4)), rng.standard_normal(8))
        x = rng.standard_normal(4)
        grad_out = rng.standard_normal(8)
        dx, dw, db = dense_backward(layer, x, grad_out)

        h = 1e-6
        loss = lambda: float(dense_forward(layer, x) @ grad_out)
        for i in range(4):
            x[i] += h
            up = loss()
            x[i] -= 2 * h
            down = loss()
            x[i] += h
            fd = (up - down) / (2 * h)
            assert abs(dx[i] - fd) <= 1e-6 * max(1.0, abs(fd))
        for i in range(8):
            for j in range(4):
                layer.weights[i, j] += h
                up = loss()
                layer.weights[i, j] -= 2 * h
                down = loss()
                layer.weights[i, j] += h
                fd = (up - down) / (2 * h)
                assert abs(dw[i, j] - fd) <= 1e-6 * max(1.0, abs(fd))

    def test_weight_gradient_is_outer_product(self):
        layer = DenseLayer(np.array([[1.0, 2.0], [3.0, 4.0]]), np.zeros(2))
        x = np.array([5.0, 7.0])
        g = np.array([0.5, -1.5])
        _, dw, db = dense_backward(layer, x, g)
        np.testing.assert_array_equal(dw, np.array([[2.5, 3.5], [-7.5, -10.5]]))
        np.testing.assert_array_equal(db, g)

    def test_shape_errors(self):
        layer = DenseLayer(np.zeros((2, 3)), np.zeros(2))
        with pytest.raises(ValueError):
            dense_forward(layer, np.zeros(4))
        with pytest.raises(ValueError):
            dense_backward(layer, np.zeros(3), np.zeros(3))

    def test_seeded_init_bounds(self):
        layer = DenseLayer.initialize(16, 4, np.random.default_rng(0))
        bound = 1 / math.sqrt(16)
        assert np.all(np.abs(layer.weights) <= bound)
        assert np.all(np.abs(layer.bias) <= bound)


class TestActivations:
    def test_fixed_points(self):
        assert tanh_forward(0.0) == 0.0
        assert sigmoid_forward(0.0) == 0.5

    def test_backward_matches_finite_differences(self):
        rng = np.random.default_rng(4)
        x = rng.uniform(-2, 2, 20)
        h = 1e-6
        for fwd, bwd in ((tanh_forward, tanh_backward), (sigmoid_forward, sigmoid_backward)):
            y = fwd(x)
            grad = bwd(y, np.ones_like(x))
            fd = (fwd(x + h) - fwd(x - h)) / (2 * h)
            np.testing.assert_allclose(grad, fd, atol=1e-7)

    def test_pi_scaled_tanh_range(self):
        x = np.linspace(-15, 15, 1001)
        out = scale_by_pi(tanh_forward(x))
        assert np.all(out > -np.pi) and np.all(out < np.pi)
        # float tanh saturates to exactly +/-1 for huge inputs; the scaled
        # output still never leaves [-pi, pi]
        extreme = scale_by_pi(tanh_forward(np.array([-1e6, 1e6])))
        assert np.all(np.abs(extreme) <= np.pi)


class TestBce:
    def test_half_probability(self):
        loss, _ = bce_loss(0.5, 1)
        assert abs(loss - math.log(2)) <= 1e-12

    def test_match_is_near_zero(self):
        assert bce_loss(1.0, 1)[0] <= 1.2e-7
        assert bce_loss(0.0, 0)[0] <= 1.2e-7

    def test_loss_nonnegative(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            assert bce_loss(float(rng.uniform(0, 1)), int(rng.integers(0, 2)))[0] >= 0

    def test_gradient_matches_finite_difference(self):
        p, y = 0.3, 0
        h = 1e-7
        _, grad = bce_loss(p, y)
        fd = (bce_loss(p + h, y)[0] - bce_loss(p - h, y)[0]) / (2 * h)
        assert abs(grad - fd) <= 1e-6 * max(1.0, abs(fd))

    def test_label_validation(self):
        with pytest.raises(ValueError):
            bce_loss(0.5, 2)
        with pytest.raises(ValueError):
            bce_loss(0.5, -1)


class TestAdam:
    def test_zero_gradient_leaves_parameters(self):
        opt = Adam(lr=0.01)
        p = np.array([1.0, -2.0])
        opt.step([p], [np.zeros(2)])
        np.testing.assert_array_equal(p, [1.0, -2.0])

    def test_first_step_magnitude(self):
        # constant unit gradient: first update is -lr * 1/(1 + eps) ~ -lr
        opt = Adam(lr=0.01)
        p = np.array([0.0])
        opt.step([p], [np.array([1.0])])
        assert abs(p[0] - (-0.01)) <= 1e-6

    def test_converges_on_quadratic(self):
        opt = Adam(lr=0.01)
        p = np.array([1.0])
        for _ in range(500):
            opt.step([p], [2.0 * p])
        assert abs(p[0]) <= 1e-3

    def test_layout_invariance(self):
        # same scalars updated as one array vs two arrays
        grads = np.array([0.3, -0.9, 1.4, 0.02])
        joined = np.array([1.0, 2.0, 3.0, 4.0])
        split_a, split_b = joined[:2].copy(), joined[2:].copy()
        opt1 = Adam(lr=0.05)
        opt2 = Adam(lr=0.05)
        for _ in range(7):
            opt1.step([joined], [grads])
            opt2.step([split_a, split_b], [grads[:2], grads[2:]])
        np.testing.assert_array_equal(joined, np.concatenate([split_a, split_b]))

    def test_shape_mismatch(self):
        opt = Adam()
        with pytest.raises(ValueError):
            opt.step([np.zeros(2)], [np.zeros(3)])
