import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpinn_mac.errors import ConfigurationError
from qpinn_mac.statevector import (
    StateVector,
    apply_cp_all,
    apply_h,
    apply_ry,
    expect_z,
    init_zero_state,
)

from oracles import H2, cp_dense, embed, ry2

R2 = 1 / math.sqrt(2)

angles = st.floats(-4 * math.pi, 4 * math.pi, allow_nan=False)


def random_state(rng, n):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return StateVector(n, v / np.linalg.norm(v))


class TestInit:
    def test_one_qubit(self):
        np.testing.assert_array_equal(init_zero_state(1).amps, [1, 0])

    def test_two_qubits(self):
        np.testing.assert_array_equal(init_zero_state(2).amps, [1, 0, 0, 0])

    @pytest.mark.parametrize("n", [0, -1, 21])
    def test_out_of_range(self, n):
        with pytest.raises(ConfigurationError, match="20"):
            init_zero_state(n)

    def test_cap_is_configurable(self):
        with pytest.raises(ConfigurationError, match="3"):
            init_zero_state(4, max_qubits=3)


class TestGates:
    def test_ry_zero_is_identity(self):
        np.testing.assert_allclose(apply_ry(init_zero_state(1), 0, 0.0).amps, [1, 0])

    def test_ry_pi_flips(self):
        np.testing.assert_allclose(apply_ry(init_zero_state(1), 0, math.pi).amps, [0, 1], atol=1e-15)

    def test_ry_half_pi_matches_dense(self):
        expected = ry2(math.pi / 2) @ np.array([1, 0])
        out = apply_ry(init_zero_state(1), 0, math.pi / 2).amps
        np.testing.assert_allclose(out, expected, atol=1e-15)
        np.testing.assert_allclose(out, [R2, R2], atol=1e-15)

    def test_h_columns(self):
        np.testing.assert_allclose(apply_h(init_zero_state(1), 0).amps, [R2, R2])
        one = StateVector(1, [0, 1])
        np.testing.assert_allclose(apply_h(one, 0).amps, [R2, -R2])

    def test_h_twice_is_identity(self, rng):
        s = random_state(rng, 3)
        orig = s.amps.copy()
        apply_h(apply_h(s, 1), 1)
        assert np.max(np.abs(s.amps - orig)) <= 1e-12

    def test_cp_flips_sign_of_all_ones(self):
        s = StateVector(2, [R2, 0, 0, R2])
        np.testing.assert_allclose(apply_cp_all(s, math.pi).amps, [R2, 0, 0, -R2], atol=1e-15)

    def test_cp_no_effect_on_zero_state(self):
        assert np.array_equal(apply_cp_all(init_zero_state(3), 1.234).amps, init_zero_state(3).amps)

    def test_cp_quarter_phase(self):
        s = StateVector(2, [0.6, 0, 0, 0.8])
        expected = cp_dense(math.pi / 2, 2) @ np.array([0.6, 0, 0, 0.8])
        out = apply_cp_all(s, math.pi / 2).amps
        np.testing.assert_allclose(out, expected, atol=1e-15)
        np.testing.assert_allclose(out, [0.6, 0, 0, -0.8j], atol=1e-15)

    def test_cp_single_qubit_is_phase_gate(self):
        s = StateVector(1, [R2, R2])
        np.testing.assert_allclose(apply_cp_all(s, 0.7).amps, [R2, R2 * np.exp(-0.7j)])

    @pytest.mark.parametrize("gate", ["ry", "h"])
    def test_qubit_out_of_range(self, gate):
        s = init_zero_state(2)
        with pytest.raises(IndexError):
            apply_ry(s, 2, 0.1) if gate == "ry" else apply_h(s, -1)


class TestExpectZ:
    def test_basis_states(self):
        assert expect_z(init_zero_state(1), 0) == 1.0
        assert expect_z(StateVector(1, [0, 1]), 0) == -1.0

    def test_equal_superposition(self):
        assert abs(expect_z(StateVector(1, [R2, R2]), 0)) < 1e-15

    def test_qubit_zero_is_most_significant(self):
        # |10> : qubit 0 is 1, qubit 1 is 0
        s = StateVector(2, [0, 0, 1, 0])
        assert expect_z(s, 0) == -1.0
        assert expect_z(s, 1) == 1.0


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 5), st.lists(st.tuples(st.sampled_from("rhc"), st.integers(0, 4), angles), max_size=25))
    def test_norm_preserved(self, n, ops):
        s = init_zero_state(n)
        for kind, q, a in ops:
            q %= n
            if kind == "r":
                apply_ry(s, q, a)
            elif kind == "h":
                apply_h(s, q)
            else:
                apply_cp_all(s, a)
        assert abs(s.norm_sq() - 1) <= 1e-12

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 5), st.integers(0, 4), angles, st.integers(0, 2**31))
    def test_inverses(self, n, q, theta, seed):
        q %= n
        s = random_state(np.random.default_rng(seed), n)
        orig = s.amps.copy()
        apply_ry(apply_ry(s, q, theta), q, -theta)
        assert np.max(np.abs(s.amps - orig)) <= 1e-12
        apply_cp_all(apply_cp_all(s, theta), -theta)
        assert np.max(np.abs(s.amps - orig)) <= 1e-12

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 5), st.lists(st.tuples(st.booleans(), st.integers(0, 4), angles), max_size=20))
    def test_real_with_pi_phase(self, n, ops):
        s = init_zero_state(n)
        for is_ry, q, a in ops:
            q %= n
            apply_ry(s, q, a) if is_ry else apply_h(s, q)
            apply_cp_all(s, math.pi)
        assert np.max(np.abs(s.amps.imag)) <= 1e-12

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_matches_dense_matrices(self, n, rng):
        for _ in range(10):
            s = random_state(rng, n)
            q = int(rng.integers(n))
            theta = float(rng.uniform(-7, 7))
            phi = float(rng.uniform(0, 2 * math.pi))
            v = s.amps.copy()
            assert np.max(np.abs(apply_ry(s, q, theta).amps - embed(ry2(theta), q, n) @ v)) <= 1e-12
            v = s.amps.copy()
            assert np.max(np.abs(apply_h(s, q).amps - embed(H2, q, n) @ v)) <= 1e-12
            v = s.amps.copy()
            assert np.max(np.abs(apply_cp_all(s, phi).amps - cp_dense(phi, n) @ v)) <= 1e-12

    def test_expect_z_bounded(self, rng):
        for n in (1, 3, 5):
            s = random_state(rng, n)
            for q in range(n):
                assert -1 - 1e-12 <= expect_z(s, q) <= 1 + 1e-12
