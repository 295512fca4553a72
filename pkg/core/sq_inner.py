# core/sq_inner.py
"""
Exact inner products between concepts under design distributions.

  qcsq-haar2:   E_rho[Tr(a rho) Tr(b rho)] over Haar pure states
                = (Tr a Tr b + Tr ab) / (D (D + 1)),  D = 2^n
  qcsq-basis:   E_x[<x|a|x> <x|b|x>] over uniform basis states
  qusq-1design: 2^-n Re Tr(U^dag V)

Pauli inputs are handled symbolically. Unitary concepts fall back to a dense
trace for n <= DENSE_TRACE_MAX_QUBITS, or to a qubit-by-qubit trace when both
circuits are a single layer of one-qubit gates.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from core.circuits import CircuitLayout
from core.clifford import dense_unitary
from core.errors import DomainError, ResourceError
from core.paulis import PauliString, pauli_trace, pauli_trace_product

logger = logging.getLogger(__name__)

DENSE_TRACE_MAX_QUBITS = 10


@dataclass(frozen=True)
class ObservableConcept:
    pauli: PauliString
    allow_identity: bool = False

    def __post_init__(self) -> None:
        if not self.pauli.is_hermitian:
            raise DomainError(f"observable concept {self.pauli} is not Hermitian")
        if self.pauli.is_identity_letters and not self.allow_identity:
            raise DomainError("observable concept must be a nontrivial Pauli")

    @property
    def n_qubits(self) -> int:
        return self.pauli.n_qubits

    @property
    def label(self) -> str:
        return str(self.pauli)


@dataclass(frozen=True)
class UnitaryConcept:
    circuit: CircuitLayout
    n_qubits: int
    # set when the circuit unitary is known to equal this Pauli word
    pauli: Optional[PauliString] = None
    label: str = ""

    def __post_init__(self) -> None:
        if not self.circuit.is_fixed:
            raise DomainError("unitary concepts carry fixed gates only")
        if self.circuit.n_qubits != self.n_qubits:
            raise DomainError("unitary concept circuit acts on the wrong number of qubits")
        if self.pauli is not None and self.pauli.n_qubits != self.n_qubits:
            raise DomainError("unitary concept Pauli form acts on the wrong number of qubits")


def _check_n(a, b) -> int:
    if a.n_qubits != b.n_qubits:
        raise DomainError(f"concepts act on {a.n_qubits} and {b.n_qubits} qubits")
    return a.n_qubits


def qcsq_inner_haar2(a: PauliString, b: PauliString, n: int) -> float:
    if a.n_qubits != n or b.n_qubits != n:
        raise DomainError(f"Pauli strings must act on {n} qubits")
    d = 2.0**n
    value = pauli_trace(a) * pauli_trace(b) + pauli_trace_product(a, b)
    return float(value.real / (d * (d + 1.0)))


def qcsq_inner_basis(a: PauliString, b: PauliString) -> float:
    """Only words without X/Y letters have nonzero diagonals."""
    _check_n(a, b)
    if any(c in "XY" for c in a.letters + b.letters):
        return 0.0
    # <x|a|x><x|b|x> = sign * (-1)^{popcount(x & (za ^ zb))}
    _, za, _ = a.masks()
    _, zb, _ = b.masks()
    if za != zb:
        return 0.0
    return float((a.coefficient * b.coefficient).real)


def _single_layer_factors(circuit: CircuitLayout) -> Optional[list]:
    """Per-qubit 2x2 factors when the circuit is one layer of one-qubit gates."""
    factors = [np.eye(2, dtype=np.complex128) for _ in range(circuit.n_qubits)]
    for b in circuit.bricks:
        if len(b.qubits) != 1:
            return None
        q = b.qubits[0]
        factors[q] = b.fixed_gate.matrix @ factors[q]
    return factors


def unitary_trace(u: UnitaryConcept, v: UnitaryConcept) -> complex:
    """Tr(U^dag V)."""
    n = _check_n(u, v)
    if u.pauli is not None and v.pauli is not None:
        return pauli_trace_product(u.pauli.dagger(), v.pauli)
    fu, fv = _single_layer_factors(u.circuit), _single_layer_factors(v.circuit)
    if fu is not None and fv is not None:
        return complex(np.prod([np.trace(a.conj().T @ b) for a, b in zip(fu, fv)]))
    if n <= DENSE_TRACE_MAX_QUBITS:
        return complex(np.sum(np.conj(dense_unitary(u.circuit)) * dense_unitary(v.circuit)))
    raise ResourceError(f"no symbolic trace for these {n}-qubit circuits and dense traces stop at {DENSE_TRACE_MAX_QUBITS}")


def qusq_inner(u: UnitaryConcept, v: UnitaryConcept) -> float:
    return float(unitary_trace(u, v).real / 2.0**u.n_qubits)


def avg_fidelity_2design(u: UnitaryConcept, v: UnitaryConcept) -> float:
    m = 2.0**u.n_qubits
    t = unitary_trace(v, u)
    return float((abs(t) ** 2 / m + 1.0) / (m + 1.0))
