import math

import numpy as np
import pytest

from qpinn_mac.errors import ShapeError
from qpinn_mac.hybrid import (
    HybridModel,
    backward,
    eval_mac,
    grad_classical,
    grad_quantum,
    init_hybrid,
)
from qpinn_mac.mlp import MLPParams, init_mlp, mlp_forward
from qpinn_mac.qnode import QNodeConfig, expectation, grad_parameter_shift

from oracles import assert_rel_close, central_diff


def make_model(rng, n=3, depth=2, m=2, hidden=(5,)):
    model = init_hybrid(hidden, m, QNodeConfig(n, depth), rng)
    # nonzero biases so no symmetry hides errors
    model.mlp.biases = [rng.normal(scale=0.3, size=b.shape) for b in model.mlp.biases]
    return model


def scalarized(model, t, adj, adj_dt):
    ev = eval_mac(model, t)
    return float(np.sum(adj * ev.y_mac) + np.sum(adj_dt * ev.y_mac_dt))


class TestEval:
    def test_invariants(self, rng):
        model = make_model(rng)
        t = np.linspace(0, 1, 6)
        ev = eval_mac(model, t)
        assert np.max(np.abs(ev.y_mac - (ev.y_hat + 1) * ev.expectations)) <= 1e-12
        assert np.max(np.abs(ev.y_mac_dt - ev.y_hat_dt * ev.expectations)) <= 1e-12
        np.testing.assert_array_equal(ev.y_hat, mlp_forward(model.mlp, "tanh", t))

    def test_quantum_regime(self, rng):
        # all-zero MLP with tanh gives yhat = 0, so the output is the expectation itself
        model = make_model(rng)
        model.mlp = MLPParams([np.zeros_like(w) for w in model.mlp.weights],
                              [np.zeros_like(b) for b in model.mlp.biases])
        ev = eval_mac(model, np.linspace(-1, 2, 9))
        assert np.array_equal(ev.y_mac, np.broadcast_to(ev.expectations, ev.y_mac.shape))

    def test_classical_regime(self, rng):
        model = make_model(rng, m=1)
        c = expectation(model.qnode_config, model.qnode_params[0])
        t = np.linspace(0, 1, 5)
        ev = eval_mac(model, t)
        assert np.array_equal(ev.y_mac[:, 0], c * (mlp_forward(model.mlp, "tanh", t)[:, 0] + 1))

    def test_arithmetic(self):
        ev = eval_mac(_const_model(0.5, 1.0), 0.2, expectations=np.array([1.0]))
        assert ev.y_mac[0] == 1.5

    def test_output_count_mismatch(self, rng):
        mlp = init_mlp([3], 2, rng)
        with pytest.raises(ShapeError):
            HybridModel(mlp, "tanh", QNodeConfig(2, 1), [np.zeros((1, 2))])


def _const_model(yhat, _):
    # single tanh unit with zero weight: yhat = tanh(b)
    mlp = MLPParams([[[0.0]]], [[math.atanh(yhat)]])
    return HybridModel(mlp, "tanh", QNodeConfig(1, 1), [np.zeros((1, 1))])


class TestGradClassical:
    def test_zero_expectations_kill_gradient(self, rng):
        # one qubit, one layer: <Z> = sin(theta)
        model = make_model(rng, n=1, depth=1, m=2)
        model.qnode_params = [np.zeros((1, 1)), np.zeros((1, 1))]  # <Z> = sin(0) = 0
        assert np.allclose(model.expectations(), 0.0, atol=1e-15)
        g = grad_classical(model, np.linspace(0, 1, 4), rng.normal(size=(4, 2)), rng.normal(size=(4, 2)))
        assert np.max(np.abs(g)) <= 1e-15

    def test_matches_fd(self, rng):
        model = make_model(rng, n=3, depth=2, m=2)
        t = np.array([0.1, 0.55, 0.9])
        adj, adj_dt = rng.normal(size=(3, 2)), rng.normal(size=(3, 2))
        nc = model.num_classical
        full = model.flatten()

        def f(x):
            return scalarized(model.with_flat(np.concatenate([x, full[nc:]])), t, adj, adj_dt)

        fd = central_diff(f, full[:nc], 1e-6)
        assert_rel_close(grad_classical(model, t, adj, adj_dt), fd, rtol=1e-5, atol=1e-9)

    def test_linear_in_adjoints(self, rng):
        model = make_model(rng)
        t = np.array([0.3, 0.7])
        a1, a2, b1, b2 = rng.normal(size=(4, 2, 2))
        g = grad_classical(model, t, a1 + a2, b1 + b2)
        g2 = grad_classical(model, t, a1, b1) + grad_classical(model, t, a2, b2)
        assert np.max(np.abs(g - g2)) <= 1e-12

    def test_shape_mismatch(self, rng):
        with pytest.raises(ShapeError):
            grad_classical(make_model(rng), np.array([0.1, 0.2]), np.zeros((2, 3)), np.zeros((2, 2)))


class TestGradQuantum:
    def test_vanishes_when_yhat_is_minus_one(self):
        # tanh cannot hit -1 exactly, so use an output saturated to -1 in double precision
        mlp = MLPParams([[[0.0]]], [[-40.0]])
        model = HybridModel(mlp, "tanh", QNodeConfig(2, 2), [np.full((2, 2), 0.7)])
        assert mlp_forward(mlp, "tanh", 0.0)[0] == -1.0
        g = grad_quantum(model, 0.0, [2.5], [0.0])
        assert not np.any(g[0])

    def test_matches_fd(self, rng):
        model = make_model(rng, n=3, depth=2, m=1)
        t = np.array([0.2, 0.6, 1.0])
        adj, adj_dt = rng.normal(size=(3, 1)), rng.normal(size=(3, 1))
        nc = model.num_classical
        full = model.flatten()

        def f(x):
            return scalarized(model.with_flat(np.concatenate([full[:nc], x])), t, adj, adj_dt)

        fd = central_diff(f, full[nc:], 1e-6)
        g = np.concatenate([b.ravel() for b in grad_quantum(model, t, adj, adj_dt)])
        assert_rel_close(g, fd, rtol=1e-5, atol=1e-9)

    def test_blocks_independent(self, rng):
        model = make_model(rng, m=3)
        t = np.array([0.4])
        adj, adj_dt = rng.normal(size=(1, 3)), rng.normal(size=(1, 3))
        g = grad_quantum(model, t, adj, adj_dt)
        other = model.copy()
        other.qnode_params[2] = other.qnode_params[2] + 0.9
        g2 = grad_quantum(other, t, adj, adj_dt)
        np.testing.assert_array_equal(g[0], g2[0])
        np.testing.assert_array_equal(g[1], g2[1])

    def test_factorized_identity(self, rng):
        model = make_model(rng, m=2)
        t = np.linspace(0, 1, 4)
        adj, adj_dt = rng.normal(size=(4, 2)), rng.normal(size=(4, 2))
        ev = eval_mac(model, t)
        g = grad_quantum(model, t, adj, adj_dt)
        for j in range(2):
            s = np.sum(adj[:, j] * (ev.y_hat[:, j] + 1) + adj_dt[:, j] * ev.y_hat_dt[:, j])
            ref = s * grad_parameter_shift(model.qnode_config, model.qnode_params[j])
            assert np.max(np.abs(g[j] - ref)) <= 1e-10


def test_full_model_fd(rng):
    model = make_model(rng, n=2, depth=2, m=2, hidden=(4, 3))
    t = np.array([0.0, 0.5, 1.0])
    adj, adj_dt = rng.normal(size=(3, 2)), rng.normal(size=(3, 2))
    g_c, g_q = backward(model, t, adj, adj_dt)
    g = np.concatenate([g_c] + [b.ravel() for b in g_q])
    fd = central_diff(lambda x: scalarized(model.with_flat(x), t, adj, adj_dt), model.flatten(), 1e-6)
    assert_rel_close(g, fd, rtol=1e-5, atol=1e-9)
