# core/statevec.py
"""
Dense statevector core.

Conventions:
  - Qubit indexing is little-endian: qubit q is bit q of the amplitude index.
  - A two-qubit gate on (qa, qb) acts on the local index 2*bit(qa) + bit(qb),
    i.e. the 4x4 matrix is written in the Kronecker order qa (x) qb.
  - Public operations are value-in / value-out; arrays handed out are copies.

The array-level helpers (prefixed apply_/..._array) accept either a single
state of shape (2^n,) or a batch of states stored column-wise, shape (2^n, B).
The circuit and gradient engines use them directly.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from core.errors import DomainError, ResourceError

logger = logging.getLogger(__name__)

MAX_QUBITS = 26
UNITARY_TOL = 1e-10
NORM_TOL = 1e-9


def check_qubit_count(n: int) -> int:
    n = int(n)
    if n < 1:
        raise DomainError(f"qubit count must be >= 1, got {n}")
    if n > MAX_QUBITS:
        raise ResourceError(f"{n} qubits exceeds the dense simulation cap of {MAX_QUBITS}")
    return n


# ----------------------------
# Types
# ----------------------------
@dataclass(frozen=True)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        check_qubit_count(self.n_qubits)
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (2**self.n_qubits,):
            raise DomainError(
                f"expected {2**self.n_qubits} amplitudes for {self.n_qubits} qubits, got shape {amps.shape}"
            )
        norm = float(np.sqrt(np.sum(np.abs(amps) ** 2)))
        if abs(norm - 1.0) > NORM_TOL:
            raise DomainError(f"state norm {norm!r} deviates from 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_array(cls, amplitudes: Sequence[complex] | np.ndarray, *, normalize: bool = False) -> "StateVector":
        amps = np.array(amplitudes, dtype=np.complex128)
        dim = amps.shape[0] if amps.ndim == 1 else 0
        n = int(round(np.log2(dim))) if dim > 0 else 0
        if amps.ndim != 1 or dim != 2**n:
            raise DomainError("amplitude array length must be a power of two")
        if normalize:
            norm = float(np.sqrt(np.sum(np.abs(amps) ** 2)))
            if norm == 0.0:
                raise DomainError("cannot normalize the zero vector")
            amps = amps / norm
        return cls(n, amps)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def copy_array(self) -> np.ndarray:
        return np.array(self.amplitudes, dtype=np.complex128)


def _check_unitary(matrix: np.ndarray, dim: int, label: str) -> np.ndarray:
    m = np.array(matrix, dtype=np.complex128)
    if m.shape != (dim, dim):
        raise DomainError(f"{label} must be {dim}x{dim}, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DomainError(f"{label} has non-finite entries")
    err = np.max(np.abs(m.conj().T @ m - np.eye(dim)))
    if err > UNITARY_TOL:
        raise DomainError(f"{label} is not unitary (max |U^dag U - I| = {err:.3e})")
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class Gate2Q:
    matrix: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "matrix", _check_unitary(self.matrix, 4, "Gate2Q"))

    @property
    def n_targets(self) -> int:
        return 2

    def dagger(self) -> "Gate2Q":
        return Gate2Q(self.matrix.conj().T)


@dataclass(frozen=True)
class Gate1Q:
    """Single-qubit gate; used for basis-change layers of fixed circuits."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "matrix", _check_unitary(self.matrix, 2, "Gate1Q"))

    @property
    def n_targets(self) -> int:
        return 1

    def dagger(self) -> "Gate1Q":
        return Gate1Q(self.matrix.conj().T)


# ----------------------------
# Array kernels
# ----------------------------
def n_qubits_of(psi: np.ndarray) -> int:
    dim = psi.shape[0]
    n = dim.bit_length() - 1
    if dim != 1 << n:
        raise DomainError(f"state dimension {dim} is not a power of two")
    return n


def apply_matrix_array(psi: np.ndarray, matrix: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """
    Apply a 2^k x 2^k matrix to the listed qubits (k = 1 or 2).

    The contraction is written out term by term so the summation order is
    fixed and independent of any BLAS threading.
    """
    n = n_qubits_of(psi)
    k = len(qubits)
    for q in qubits:
        if not 0 <= q < n:
            raise DomainError(f"qubit {q} out of range for {n} qubits")
    if k == 2 and qubits[0] == qubits[1]:
        raise DomainError("two-qubit gate needs distinct qubits")

    batch_shape = psi.shape[1:]
    t = psi.reshape((2,) * n + batch_shape)
    axes = [n - 1 - q for q in qubits]
    front = list(range(k))
    t = np.moveaxis(t, axes, front)
    moved_shape = t.shape
    flat = t.reshape(1 << k, -1)

    out = np.empty_like(flat)
    size = 1 << k
    for r in range(size):
        acc = matrix[r, 0] * flat[0]
        for c in range(1, size):
            acc = acc + matrix[r, c] * flat[c]
        out[r] = acc

    out = np.moveaxis(out.reshape(moved_shape), front, axes)
    return np.ascontiguousarray(out).reshape(psi.shape)


@lru_cache(maxsize=32)
def _sum_z_weights(n: int) -> np.ndarray:
    # eigenvalue of sum_i Z_i on basis index b is n - 2*popcount(b)
    idx = np.arange(1 << n, dtype=np.int64)
    ones = np.zeros(1 << n, dtype=np.int64)
    for q in range(n):
        ones += (idx >> q) & 1
    w = (n - 2 * ones).astype(np.float64)
    w.setflags(write=False)
    return w


def sum_z_weights(n: int) -> np.ndarray:
    return _sum_z_weights(check_qubit_count(n))


def readout_mask(n: int, qubit: int) -> np.ndarray:
    """Boolean mask of basis indices whose bit `qubit` is 1."""
    idx = np.arange(1 << n, dtype=np.int64)
    return ((idx >> qubit) & 1).astype(bool)


def marginal_one_array(psi: np.ndarray, qubit: int) -> np.ndarray | float:
    """P(qubit = 1) for a single state or each column of a batch."""
    n = n_qubits_of(psi)
    probs = np.abs(psi) ** 2
    t = probs.reshape((2,) * n + psi.shape[1:])
    axis = n - 1 - qubit
    s1 = np.take(t, 1, axis=axis)
    s0 = np.take(t, 0, axis=axis)
    lead = tuple(range(n - 1))
    p1 = np.sum(s1, axis=lead)
    total = p1 + np.sum(s0, axis=lead)
    out = p1 / total
    return float(out) if np.ndim(out) == 0 else out


def basis_batch(n: int, indices: Sequence[int]) -> np.ndarray:
    """Column-stacked computational basis states, shape (2^n, len(indices))."""
    n = check_qubit_count(n)
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= (1 << n)):
        raise DomainError(f"basis index out of range for {n} qubits")
    out = np.zeros((1 << n, idx.size), dtype=np.complex128)
    out[idx, np.arange(idx.size)] = 1.0
    return out


# ----------------------------
# Public operations
# ----------------------------
def basis_state(n: int, index: int) -> StateVector:
    n = check_qubit_count(n)
    if not 0 <= int(index) < (1 << n):
        raise DomainError(f"basis index {index} out of range for {n} qubits")
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[int(index)] = 1.0
    return StateVector(n, amps)


def apply_gate2q(state: StateVector, g: Gate2Q, qa: int, qb: int) -> StateVector:
    if qa == qb:
        raise DomainError("apply_gate2q needs qa != qb")
    out = apply_matrix_array(state.amplitudes, g.matrix, (qa, qb))
    return StateVector(state.n_qubits, out)


def apply_gate1q(state: StateVector, g: Gate1Q, q: int) -> StateVector:
    out = apply_matrix_array(state.amplitudes, g.matrix, (q,))
    return StateVector(state.n_qubits, out)


def overlap(a: StateVector, b: StateVector) -> complex:
    """<a|b> via numpy's pairwise summation (fixed reduction tree)."""
    if a.n_qubits != b.n_qubits:
        raise DomainError(f"overlap of {a.n_qubits}- and {b.n_qubits}-qubit states")
    return complex(np.sum(np.conj(a.amplitudes) * b.amplitudes))


def marginal_prob(state: StateVector, qubit: int, outcome: int) -> float:
    if not 0 <= qubit < state.n_qubits:
        raise DomainError(f"qubit {qubit} out of range for {state.n_qubits} qubits")
    if outcome not in (0, 1):
        raise DomainError(f"outcome must be 0 or 1, got {outcome}")
    p1 = marginal_one_array(state.amplitudes, qubit)
    return float(p1) if outcome == 1 else float(1.0 - p1)


def sum_z_expectation(state: StateVector) -> float:
    probs = np.abs(state.amplitudes) ** 2
    return float(np.sum(probs * _sum_z_weights(state.n_qubits)))
