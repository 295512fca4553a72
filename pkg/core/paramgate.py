# core/paramgate.py
"""
Lie-algebra gate parameterizations.

Two families of 4x4 unitaries U = exp(H) with H skew-Hermitian:

  - GateParams32: H = M - M^dag, M a general complex 4x4 matrix. The 32 reals
    are Re(M) in row-major order followed by Im(M) in row-major order.
  - GateParams16: H = sum_k theta_k (i Q_k), Q_k the two-qubit Pauli words
    I I, I X, ..., Z Z in lexicographic order (first letter on the gate's
    first qubit).

Exponentials and their Frechet derivatives come from one Hermitian
eigendecomposition of A = -iH (Daleckii-Krein):

    exp(H) = V diag(e^{i lam}) V^dag
    dexp_H[D] = V (Phi o (V^dag D V)) V^dag,
    Phi_ab = (e^{i lam_a} - e^{i lam_b}) / (i (lam_a - lam_b)),  Phi_aa = e^{i lam_a}
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Union

import numpy as np
import scipy.linalg

from core.errors import DomainError, NumericError
from core.paulis import LETTERS, PAULI_MATRICES
from core.statevec import Gate2Q

logger = logging.getLogger(__name__)

CONFLUENT_TOL = 1e-12

PARAMS32 = "params32"
PARAMS16 = "params16"
PARAM_SIZES = {PARAMS32: 32, PARAMS16: 16}


# ----------------------------
# Parameter containers
# ----------------------------
def _finite_vector(values, size: int, label: str) -> np.ndarray:
    v = np.array(values, dtype=np.float64).reshape(-1)
    if v.shape != (size,):
        raise DomainError(f"{label} needs {size} values, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise DomainError(f"{label} has non-finite entries")
    v.setflags(write=False)
    return v


@dataclass(frozen=True)
class GateParams32:
    values: np.ndarray
    kind = PARAMS32

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _finite_vector(self.values, 32, "GateParams32"))

    def matrix_m(self) -> np.ndarray:
        return self.values[:16].reshape(4, 4) + 1j * self.values[16:].reshape(4, 4)

    def generator(self) -> np.ndarray:
        m = self.matrix_m()
        return m - m.conj().T


@dataclass(frozen=True)
class GateParams16:
    values: np.ndarray
    kind = PARAMS16

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _finite_vector(self.values, 16, "GateParams16"))

    def generator(self) -> np.ndarray:
        return np.tensordot(self.values, generators16(), axes=1)


GateParams = Union[GateParams32, GateParams16]


@dataclass(frozen=True)
class FrechetPair:
    unitary: Gate2Q
    partials: List[np.ndarray]


# ----------------------------
# Generator bases
# ----------------------------
@lru_cache(maxsize=1)
def generators16() -> np.ndarray:
    """Stack (16, 4, 4) of i * (P (x) Q), P, Q in I, X, Y, Z."""
    out = np.empty((16, 4, 4), dtype=np.complex128)
    k = 0
    for a in LETTERS:
        for b in LETTERS:
            out[k] = 1j * np.kron(PAULI_MATRICES[a], PAULI_MATRICES[b])
            k += 1
    out.setflags(write=False)
    return out


@lru_cache(maxsize=1)
def generators32() -> np.ndarray:
    """Stack (32, 4, 4) of dH/dtheta_k for H = M - M^dag."""
    out = np.zeros((32, 4, 4), dtype=np.complex128)
    for j in range(4):
        for k in range(4):
            r = 4 * j + k
            # real part of M_jk
            out[r, j, k] += 1.0
            out[r, k, j] -= 1.0
            # imaginary part of M_jk
            out[16 + r, j, k] += 1j
            out[16 + r, k, j] += 1j
    out.setflags(write=False)
    return out


def directions_for(kind: str) -> np.ndarray:
    if kind == PARAMS32:
        return generators32()
    if kind == PARAMS16:
        return generators16()
    raise DomainError(f"unknown parameter kind {kind!r}")


def make_params(kind: str, values) -> GateParams:
    if kind == PARAMS32:
        return GateParams32(values)
    if kind == PARAMS16:
        return GateParams16(values)
    raise DomainError(f"unknown parameter kind {kind!r}")


def init_params(kind: str, rng: np.random.Generator) -> GateParams:
    """i.i.d. standard normal entries."""
    return make_params(kind, rng.standard_normal(PARAM_SIZES[kind]))


# ----------------------------
# Exponential map
# ----------------------------
def _eig_of_generator(h: np.ndarray):
    a = -1j * h
    a = 0.5 * (a + a.conj().T)
    if not np.all(np.isfinite(a)):
        raise NumericError("generator has non-finite entries")
    try:
        lam, v = scipy.linalg.eigh(a)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericError(f"eigendecomposition failed: {exc}") from exc
    if not (np.all(np.isfinite(lam)) and np.all(np.isfinite(v))):
        raise NumericError("eigendecomposition returned non-finite values")
    return lam, v


def _exp_from_eig(lam: np.ndarray, v: np.ndarray) -> np.ndarray:
    return (v * np.exp(1j * lam)) @ v.conj().T


def divided_difference_kernel(lam: np.ndarray) -> np.ndarray:
    """
    Phi_ab = (e^{i la} - e^{i lb}) / (i (la - lb)), written as
    e^{i (la + lb)/2} sinc((la - lb)/2) so nearby eigenvalues lose no digits.
    """
    la = lam[:, None]
    lb = lam[None, :]
    delta = la - lb
    phi = np.exp(0.5j * (la + lb)) * np.sinc(delta / (2.0 * np.pi))
    confluent = np.abs(delta) < CONFLUENT_TOL
    if np.any(confluent & ~np.eye(lam.size, dtype=bool)):
        logger.debug("confluent eigenvalues in gate generator; using e^{i lam} limit")
    return np.where(confluent, np.exp(1j * la) * np.ones_like(lb), phi)


def expm_skew(h: np.ndarray) -> np.ndarray:
    lam, v = _eig_of_generator(h)
    return _exp_from_eig(lam, v)


def frechet_exp(h: np.ndarray, directions: np.ndarray):
    """(exp(H), [dexp_H[D_k] for each direction])."""
    lam, v = _eig_of_generator(h)
    u = _exp_from_eig(lam, v)
    phi = divided_difference_kernel(lam)
    vh = v.conj().T
    rotated = np.einsum("ab,kbc,cd->kad", vh, directions, v)
    partials = np.einsum("ab,kbc,cd->kad", v, phi[None, :, :] * rotated, vh)
    return u, partials


def build_unitary32(p: GateParams32) -> Gate2Q:
    return Gate2Q(expm_skew(p.generator()))


def build_unitary16(p: GateParams16) -> Gate2Q:
    return Gate2Q(expm_skew(p.generator()))


def build_unitary(p: GateParams) -> Gate2Q:
    return Gate2Q(expm_skew(p.generator()))


def build_with_partials(p: GateParams) -> FrechetPair:
    u, partials = frechet_exp(p.generator(), directions_for(p.kind))
    return FrechetPair(unitary=Gate2Q(u), partials=[partials[k] for k in range(partials.shape[0])])
