# core/paulis.py
"""
Signed Pauli words.

A PauliString stores one letter per qubit (letters[q] acts on qubit q) and a
global phase i^phase_power. Products and traces are evaluated letter by
letter; nothing here builds a dense matrix except `dense()`, which exists
for small-n cross checks.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, Tuple

import numpy as np

from core.errors import DomainError
from core.statevec import StateVector, n_qubits_of

logger = logging.getLogger(__name__)

LETTERS = "IXYZ"

PAULI_MATRICES: Dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}

# single-qubit products a*b -> (letter, power of i)
_PRODUCT: Dict[Tuple[str, str], Tuple[str, int]] = {}
for _a in LETTERS:
    _PRODUCT[("I", _a)] = (_a, 0)
    _PRODUCT[(_a, "I")] = (_a, 0)
    _PRODUCT[(_a, _a)] = ("I", 0)
_PRODUCT[("X", "Y")] = ("Z", 1)
_PRODUCT[("Y", "X")] = ("Z", 3)
_PRODUCT[("Y", "Z")] = ("X", 1)
_PRODUCT[("Z", "Y")] = ("X", 3)
_PRODUCT[("Z", "X")] = ("Y", 1)
_PRODUCT[("X", "Z")] = ("Y", 3)


@dataclass(frozen=True)
class PauliString:
    n_qubits: int
    letters: str
    phase_power: int = 0

    def __post_init__(self) -> None:
        letters = "".join(self.letters).upper()
        if len(letters) != self.n_qubits:
            raise DomainError(f"expected {self.n_qubits} letters, got {len(letters)}")
        bad = set(letters) - set(LETTERS)
        if bad:
            raise DomainError(f"invalid Pauli letters {sorted(bad)}")
        object.__setattr__(self, "letters", letters)
        object.__setattr__(self, "phase_power", int(self.phase_power) % 4)

    # constructors
    @classmethod
    def from_label(cls, label: str, phase_power: int = 0) -> "PauliString":
        """Label in qubit order: label[q] acts on qubit q."""
        return cls(len(label), label, phase_power)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, "I" * n, 0)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> "PauliString":
        if not 0 <= qubit < n:
            raise DomainError(f"qubit {qubit} out of range for {n} qubits")
        chars = ["I"] * n
        chars[qubit] = letter
        return cls(n, "".join(chars), 0)

    @classmethod
    def on_qubits(cls, n: int, assignment: Dict[int, str]) -> "PauliString":
        chars = ["I"] * n
        for q, letter in assignment.items():
            if not 0 <= q < n:
                raise DomainError(f"qubit {q} out of range for {n} qubits")
            chars[q] = letter
        return cls(n, "".join(chars), 0)

    # queries
    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(q for q, c in enumerate(self.letters) if c != "I")

    @property
    def is_identity_letters(self) -> bool:
        return all(c == "I" for c in self.letters)

    @property
    def is_hermitian(self) -> bool:
        return self.phase_power in (0, 2)

    @property
    def coefficient(self) -> complex:
        return (1, 1j, -1, -1j)[self.phase_power]

    def unsigned(self) -> "PauliString":
        return PauliString(self.n_qubits, self.letters, 0)

    def dagger(self) -> "PauliString":
        return PauliString(self.n_qubits, self.letters, -self.phase_power)

    def with_letters(self, updates: Dict[int, str], extra_phase: int = 0) -> "PauliString":
        chars = list(self.letters)
        for q, letter in updates.items():
            chars[q] = letter
        return PauliString(self.n_qubits, "".join(chars), self.phase_power + extra_phase)

    def masks(self) -> Tuple[int, int, int]:
        """(x_mask, z_mask, y_count) with Y contributing to both masks."""
        x_mask = z_mask = 0
        y_count = 0
        for q, c in enumerate(self.letters):
            if c in "XY":
                x_mask |= 1 << q
            if c in "ZY":
                z_mask |= 1 << q
            if c == "Y":
                y_count += 1
        return x_mask, z_mask, y_count

    def dense(self) -> np.ndarray:
        """Dense 2^n x 2^n matrix (small n only)."""
        out = np.array([[1.0 + 0j]])
        for q in range(self.n_qubits):
            # qubit q is bit q: highest qubit is the leftmost Kronecker factor
            out = np.kron(PAULI_MATRICES[self.letters[q]], out)
        return self.coefficient * out

    def __str__(self) -> str:
        sign = ("+", "+i", "-", "-i")[self.phase_power]
        return f"{sign}{self.letters}"


def _check_pair(a: PauliString, b: PauliString) -> None:
    if a.n_qubits != b.n_qubits:
        raise DomainError(f"Pauli strings act on {a.n_qubits} and {b.n_qubits} qubits")


def pauli_mul(a: PauliString, b: PauliString) -> PauliString:
    _check_pair(a, b)
    phase = a.phase_power + b.phase_power
    out = []
    for ca, cb in zip(a.letters, b.letters):
        letter, p = _PRODUCT[(ca, cb)]
        out.append(letter)
        phase += p
    return PauliString(a.n_qubits, "".join(out), phase)


def pauli_trace_product(a: PauliString, b: PauliString) -> complex:
    """Tr(ab) = 2^n i^phase when ab is a phased identity, else 0."""
    prod = pauli_mul(a, b)
    if not prod.is_identity_letters:
        return 0j
    return complex(2.0**a.n_qubits * prod.coefficient)


def pauli_trace(a: PauliString) -> complex:
    return pauli_trace_product(a, PauliString.identity(a.n_qubits))


def apply_pauli_array(psi: np.ndarray, p: PauliString) -> np.ndarray:
    """P|psi> for a single state or a column batch, via index masks."""
    n = n_qubits_of(psi)
    if n != p.n_qubits:
        raise DomainError(f"{p.n_qubits}-qubit Pauli applied to a {n}-qubit state")
    x_mask, z_mask, y_count = p.masks()
    idx = np.arange(1 << n, dtype=np.int64)
    # P|b> = i^(phase + #Y) (-1)^popcount(b & z) |b ^ x>
    parity = np.zeros(1 << n, dtype=np.int64)
    masked = idx & z_mask
    for q in range(n):
        parity ^= (masked >> q) & 1
    signs = 1.0 - 2.0 * parity
    coeff = (1, 1j, -1, -1j)[(p.phase_power + y_count) % 4]
    src = psi * (signs if psi.ndim == 1 else signs[:, None])
    out = np.empty_like(psi)
    out[idx ^ x_mask] = src
    return coeff * out


def pauli_expectation(state: StateVector, p: PauliString) -> float:
    if state.n_qubits != p.n_qubits:
        raise DomainError(f"{p.n_qubits}-qubit Pauli measured on a {state.n_qubits}-qubit state")
    value = complex(np.sum(np.conj(state.amplitudes) * apply_pauli_array(state.amplitudes, p)))
    if abs(value.imag) > 1e-10:
        raise DomainError(f"expectation of a non-Hermitian Pauli {p} has imaginary part {value.imag:.3e}")
    return float(value.real)


def enumerate_words(n: int, alphabet: str = "XYZ") -> Iterable[PauliString]:
    """All words over `alphabet` in lexicographic order of qubit 0 first."""
    total = len(alphabet) ** n
    for k in range(total):
        chars = []
        r = k
        for _ in range(n):
            chars.append(alphabet[r % len(alphabet)])
            r //= len(alphabet)
        yield PauliString(n, "".join(chars), 0)
