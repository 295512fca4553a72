# tests/test_statevec.py
from __future__ import annotations

import numpy as np
import pytest

from core.errors import DomainError, ResourceError
from core.statevec import (
    MAX_QUBITS,
    Gate1Q,
    Gate2Q,
    StateVector,
    apply_gate1q,
    apply_gate2q,
    apply_matrix_array,
    basis_batch,
    basis_state,
    check_qubit_count,
    marginal_prob,
    overlap,
    sum_z_expectation,
)


class TestBasisState:
    def test_single_amplitude(self):
        s = basis_state(3, 5)
        assert s.n_qubits == 3
        assert s.amplitudes[5] == 1.0
        assert np.count_nonzero(s.amplitudes) == 1

    @pytest.mark.parametrize("n,index", [(2, 4), (3, -1)])
    def test_out_of_range(self, n, index):
        with pytest.raises(DomainError, match="out of range"):
            basis_state(n, index)

    def test_qubit_cap(self):
        with pytest.raises(ResourceError, match="cap"):
            check_qubit_count(MAX_QUBITS + 1)
        with pytest.raises(DomainError):
            check_qubit_count(0)

    def test_amplitudes_are_read_only(self):
        s = basis_state(2, 0)
        with pytest.raises(ValueError):
            s.amplitudes[0] = 0.5


class TestStateVector:
    def test_from_array_rejects_bad_norm(self):
        with pytest.raises(DomainError, match="norm"):
            StateVector.from_array([1.0, 1.0])

    @pytest.mark.parametrize("amps", [[1.0, 1.0], [0.5, 0.0, 0.0, 0.0], [1.0 + 1e-6, 0.0]])
    def test_constructor_rejects_bad_norm(self, amps):
        with pytest.raises(DomainError, match="deviates from 1"):
            StateVector(int(np.log2(len(amps))), np.array(amps))

    def test_constructor_accepts_rounding_noise(self):
        s = StateVector(1, np.array([1.0 + 1e-12, 0.0]))
        assert s.norm() == pytest.approx(1.0)

    def test_from_array_normalizes(self):
        s = StateVector.from_array([3.0, 4.0], normalize=True)
        assert s.norm() == pytest.approx(1.0)
        assert s.amplitudes[1] == pytest.approx(0.8)

    def test_rejects_non_power_of_two(self):
        with pytest.raises(DomainError, match="power of two"):
            StateVector.from_array([1.0, 0.0, 0.0], normalize=True)


class TestGates:
    def test_non_unitary_rejected(self):
        with pytest.raises(DomainError, match="not unitary"):
            Gate2Q(np.ones((4, 4)))

    def test_wrong_shape_rejected(self):
        with pytest.raises(DomainError, match="4x4"):
            Gate2Q(np.eye(2))

    def test_dagger_inverts(self, haar_unitary):
        g = Gate2Q(haar_unitary(4))
        assert np.allclose(g.dagger().matrix @ g.matrix, np.eye(4))


class TestApplyGate:
    @pytest.mark.parametrize("n,qa,qb", [(2, 0, 1), (2, 1, 0), (3, 0, 2), (3, 2, 1), (4, 1, 3)])
    def test_matches_dense_oracle(self, n, qa, qb, rng, haar_unitary, dense_operator, random_state):
        u = haar_unitary(4, seed=n * 10 + qa)
        psi = random_state(n, rng)
        out = apply_gate2q(StateVector(n, psi), Gate2Q(u), qa, qb)
        expected = dense_operator(n, u, (qa, qb)) @ psi
        assert np.allclose(out.amplitudes, expected, atol=1e-12)

    @pytest.mark.parametrize("n,low", [(2, 0), (3, 1), (4, 0), (4, 2)])
    def test_adjacent_pair_is_kronecker_order(self, n, low, rng, haar_unitary, kron_operator, random_state):
        u = haar_unitary(4, seed=3 + low)
        psi = random_state(n, rng)
        out = apply_matrix_array(psi, u, (low + 1, low))
        assert np.allclose(out, kron_operator(n, u, low) @ psi, atol=1e-12)

    def test_single_qubit_gate(self, rng, haar_unitary, kron_operator, random_state):
        u = haar_unitary(2)
        psi = random_state(3, rng)
        out = apply_gate1q(StateVector(3, psi), Gate1Q(u), 1)
        assert np.allclose(out.amplitudes, kron_operator(3, u, 1) @ psi)

    def test_same_qubit_rejected(self, haar_unitary):
        with pytest.raises(DomainError, match="qa != qb"):
            apply_gate2q(basis_state(2, 0), Gate2Q(haar_unitary(4)), 1, 1)

    def test_batch_columns_match_single_states(self, rng, haar_unitary, random_state):
        u = haar_unitary(4)
        cols = np.stack([random_state(3, rng) for _ in range(4)], axis=1)
        batched = apply_matrix_array(cols, u, (0, 2))
        for j in range(4):
            assert np.allclose(batched[:, j], apply_matrix_array(cols[:, j], u, (0, 2)))

    def test_preserves_norm(self, rng, haar_unitary, random_state):
        psi = StateVector(4, random_state(4, rng))
        out = apply_gate2q(psi, Gate2Q(haar_unitary(4)), 3, 0)
        assert out.norm() == pytest.approx(1.0, abs=1e-12)


class TestMeasurements:
    def test_marginal_of_basis_state(self):
        s = basis_state(3, 0b101)
        assert marginal_prob(s, 0, 1) == 1.0
        assert marginal_prob(s, 1, 1) == 0.0
        assert marginal_prob(s, 2, 0) == 0.0

    def test_marginal_bad_outcome(self):
        with pytest.raises(DomainError, match="outcome"):
            marginal_prob(basis_state(1, 0), 0, 2)

    @pytest.mark.parametrize("index,expected", [(0, 3.0), (0b111, -3.0), (0b010, 1.0)])
    def test_sum_z_on_basis(self, index, expected):
        assert sum_z_expectation(basis_state(3, index)) == expected

    def test_overlap_conjugates_left(self):
        a = StateVector.from_array([1.0, 1.0j], normalize=True)
        b = StateVector.from_array([1.0, 0.0])
        assert overlap(a, b) == pytest.approx(1 / np.sqrt(2))
        assert overlap(b, a) == pytest.approx(1 / np.sqrt(2))
        assert overlap(a, a) == pytest.approx(1.0)

    def test_basis_batch(self):
        b = basis_batch(2, [0, 3])
        assert b.shape == (4, 2)
        assert b[0, 0] == 1 and b[3, 1] == 1
