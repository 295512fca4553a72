# core/clifford.py
"""
Symbolic Pauli propagation through fixed Clifford circuits.

conjugate_pauli(P, circuit) returns U^dag P U for U the circuit unitary,
processing bricks from last to first. Each fixed gate is turned into a
lookup table (local Pauli word -> image word and phase) once, by matching
G^dag P G against the 4^k local Pauli matrices; a gate whose images are not
single Pauli words is rejected as non-Clifford.
"""
from __future__ import annotations

import logging
from functools import lru_cache
from itertools import product
from typing import Dict, Tuple

import numpy as np

from core.circuits import CircuitLayout
from core.errors import DomainError
from core.paulis import LETTERS, PAULI_MATRICES, PauliString
from core.statevec import Gate1Q, Gate2Q

logger = logging.getLogger(__name__)

_PHASES = (1, 1j, -1, -1j)

# gate tables used by the constructions
SWAP = Gate2Q(np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128))
# control on the first qubit: I(x)Z -> Z(x)Z
CNOT = Gate2Q(np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128))
# control on the second qubit: Z(x)I -> Z(x)Z
CNOT_REVERSED = Gate2Q(np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=np.complex128))
HADAMARD = Gate1Q(np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0))
S_DAG = Gate1Q(np.diag([1.0, -1j]).astype(np.complex128))
# B^dag Z B = Y for B = H S^dag
H_SDAG = Gate1Q(HADAMARD.matrix @ S_DAG.matrix)
PAULI_GATES = {letter: Gate1Q(PAULI_MATRICES[letter]) for letter in "XYZ"}


def _local_words(k: int):
    return ["".join(w) for w in product(LETTERS, repeat=k)]


def _local_dense(word: str) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for c in word:
        out = np.kron(out, PAULI_MATRICES[c])
    return out


@lru_cache(maxsize=256)
def _table_for(matrix_bytes: bytes, k: int) -> Dict[str, Tuple[str, int]]:
    g = np.frombuffer(matrix_bytes, dtype=np.complex128).reshape(1 << k, 1 << k)
    words = _local_words(k)
    dense = {w: _local_dense(w) for w in words}
    table: Dict[str, Tuple[str, int]] = {}
    for w in words:
        image = g.conj().T @ dense[w] @ g
        match = None
        for cand in words:
            coef = np.trace(dense[cand].conj().T @ image) / (1 << k)
            if abs(abs(coef) - 1.0) < 1e-9:
                power = int(np.argmin([abs(coef - ph) for ph in _PHASES]))
                if abs(coef - _PHASES[power]) < 1e-9:
                    match = (cand, power)
                break
        if match is None:
            raise DomainError("gate is not Clifford: a Pauli image is not a single Pauli word")
        table[w] = match
    return table


def pauli_table(gate) -> Dict[str, Tuple[str, int]]:
    """Local word (first letter on the brick's first qubit) -> (image, i-power)."""
    m = np.ascontiguousarray(gate.matrix, dtype=np.complex128)
    return _table_for(m.tobytes(), gate.n_targets)


def is_clifford(gate) -> bool:
    try:
        pauli_table(gate)
    except DomainError:
        return False
    return True


def conjugate_pauli(p: PauliString, circuit: CircuitLayout) -> PauliString:
    if circuit.n_qubits != p.n_qubits:
        raise DomainError("Pauli string and circuit disagree on qubit count")
    if not circuit.is_fixed:
        raise DomainError("symbolic propagation needs a circuit of fixed gates")
    out = p
    for b in reversed(circuit.bricks):
        table = pauli_table(b.fixed_gate)
        word = "".join(out.letters[q] for q in b.qubits)
        image, power = table[word]
        out = out.with_letters({q: image[i] for i, q in enumerate(b.qubits)}, power)
    return out


def dense_unitary(circuit: CircuitLayout) -> np.ndarray:
    """Dense 2^n x 2^n circuit unitary (small n only)."""
    from core.circuits import apply_layout_array

    dim = 1 << circuit.n_qubits
    return apply_layout_array(circuit, [], np.eye(dim, dtype=np.complex128))
