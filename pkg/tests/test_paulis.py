# tests/test_paulis.py
from __future__ import annotations

import itertools

import numpy as np
import pytest

from core.errors import DomainError
from core.paulis import (
    PauliString,
    apply_pauli_array,
    enumerate_words,
    pauli_expectation,
    pauli_mul,
    pauli_trace,
    pauli_trace_product,
)
from core.statevec import StateVector, basis_state


class TestPauliString:
    def test_letters_normalized(self):
        p = PauliString(3, "xiz", 5)
        assert p.letters == "XIZ"
        assert p.phase_power == 1

    @pytest.mark.parametrize("n,letters,match", [(2, "XYZ", "expected 2 letters"), (2, "XA", "invalid Pauli")])
    def test_invalid(self, n, letters, match):
        with pytest.raises(DomainError, match=match):
            PauliString(n, letters)

    def test_support_and_single(self):
        p = PauliString.single(4, 2, "Y")
        assert p.letters == "IIYI"
        assert p.support == (2,)
        assert PauliString.identity(3).is_identity_letters

    def test_masks(self):
        x, z, y = PauliString.from_label("XYZI").masks()
        assert (x, z, y) == (0b0011, 0b0110, 1)

    def test_dense_is_little_endian(self):
        # Z on qubit 0 flips the sign of odd basis indices
        d = PauliString.single(2, 0, "Z").dense()
        assert np.allclose(np.diag(d), [1, -1, 1, -1])


class TestProducts:
    @pytest.mark.parametrize("a,b", list(itertools.product(["IX", "YZ", "XY", "ZZ"], repeat=2)))
    def test_matches_dense(self, a, b):
        pa = PauliString.from_label(a)
        pb = PauliString.from_label(b, phase_power=1)
        assert np.allclose(pauli_mul(pa, pb).dense(), pa.dense() @ pb.dense())

    def test_trace_product(self):
        p = PauliString.from_label("XZY")
        assert pauli_trace_product(p, p) == pytest.approx(8.0)
        assert pauli_trace_product(p, PauliString.from_label("XZZ")) == 0
        assert pauli_trace(PauliString.identity(2)) == pytest.approx(4.0)

    def test_mismatched_sizes(self):
        with pytest.raises(DomainError, match="act on"):
            pauli_mul(PauliString.identity(2), PauliString.identity(3))


class TestApply:
    @pytest.mark.parametrize("label", ["X", "Y", "Z", "XY", "YZI", "ZXYI"])
    def test_matches_dense(self, label, rng, random_state):
        p = PauliString.from_label(label, phase_power=2)
        psi = random_state(len(label), rng)
        assert np.allclose(apply_pauli_array(psi, p), p.dense() @ psi)

    def test_batch(self, rng, random_state):
        p = PauliString.from_label("YX")
        cols = np.stack([random_state(2, rng), random_state(2, rng)], axis=1)
        assert np.allclose(apply_pauli_array(cols, p), p.dense() @ cols)

    def test_expectation_on_basis(self):
        s = basis_state(2, 0b01)
        assert pauli_expectation(s, PauliString.from_label("ZI")) == -1.0
        assert pauli_expectation(s, PauliString.from_label("IZ")) == 1.0
        assert pauli_expectation(s, PauliString.from_label("XI")) == 0.0

    def test_non_hermitian_expectation_rejected(self):
        s = StateVector.from_array([1.0, 1.0j], normalize=True)
        with pytest.raises(DomainError, match="non-Hermitian"):
            pauli_expectation(s, PauliString.from_label("Y", phase_power=1))


class TestEnumerate:
    def test_counts_and_order(self):
        words = list(enumerate_words(2))
        assert len(words) == 9
        assert words[0].letters == "XX"
        assert words[1].letters == "YX"
        assert len({w.letters for w in enumerate_words(3, "IXYZ")}) == 64
