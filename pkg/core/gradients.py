# core/gradients.py
"""
Adjoint differentiation over circuit layouts.

Every supported loss is a real functional of the output state whose
derivative has the form  d loss / d theta = 2 Re <lambda | d psi / d theta>
for some co-state lambda. The engine runs one reverse sweep:

    for brick k = K..1:
        psi    <- U_k^dag psi                 (state entering brick k)
        grad  += 2 Re sum_ab dU_ab R_ab,  R_ab = sum_rest conj(lam_a) psi_b
        lam    <- U_k^dag lam

Inputs may be batched column-wise; the batch axis is summed into R, so a
mini-batch costs one sweep instead of B.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from core.circuits import CircuitLayout, apply_layout_array, brick_matrix
from core.errors import DomainError
from core.paramgate import build_with_partials, make_params
from core.paulis import PauliString, apply_pauli_array
from core.statevec import (
    Gate2Q,
    StateVector,
    apply_matrix_array,
    marginal_one_array,
    readout_mask,
    sum_z_weights,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GradResult:
    value: float
    grad: np.ndarray


# ----------------------------
# Observables
# ----------------------------
@dataclass(frozen=True)
class PauliSum:
    """O = sum_i c_i P_i + shift * I with real c_i and Hermitian P_i."""

    n_qubits: int
    terms: Tuple[Tuple[float, PauliString], ...]
    shift: float = 0.0

    def __post_init__(self) -> None:
        terms = []
        for coef, p in self.terms:
            if p.n_qubits != self.n_qubits:
                raise DomainError("Pauli term acts on the wrong number of qubits")
            if not p.is_hermitian:
                raise DomainError(f"Pauli term {p} is not Hermitian")
            terms.append((float(coef), p))
        object.__setattr__(self, "terms", tuple(terms))

    def apply(self, psi: np.ndarray) -> np.ndarray:
        out = np.zeros_like(psi)
        for coef, p in self.terms:
            out = out + coef * apply_pauli_array(psi, p)
        return out

    def expectation(self, psi: np.ndarray):
        val = np.real(np.sum(np.conj(psi) * self.apply(psi), axis=0)) + self.shift
        return float(val) if np.ndim(val) == 0 else val


@dataclass(frozen=True)
class SumZ:
    """O = sum_i Z_i + shift * I (diagonal; one pass over amplitudes)."""

    n_qubits: int
    shift: float = 0.0

    def apply(self, psi: np.ndarray) -> np.ndarray:
        w = sum_z_weights(self.n_qubits)
        return psi * (w if psi.ndim == 1 else w[:, None])

    def expectation(self, psi: np.ndarray):
        w = sum_z_weights(self.n_qubits)
        probs = np.abs(psi) ** 2
        val = np.sum(probs * (w if psi.ndim == 1 else w[:, None]), axis=0) + self.shift
        return float(val) if np.ndim(val) == 0 else val


Observable = Union[PauliSum, SumZ]


# ----------------------------
# Engine
# ----------------------------
def _flatten_pair(psi: np.ndarray, qubits: Tuple[int, ...]) -> np.ndarray:
    n = psi.shape[0].bit_length() - 1
    k = len(qubits)
    t = psi.reshape((2,) * n + psi.shape[1:])
    t = np.moveaxis(t, [n - 1 - q for q in qubits], list(range(k)))
    return t.reshape(1 << k, -1)


def reduced_outer(lam: np.ndarray, psi: np.ndarray, qubits: Tuple[int, ...]) -> np.ndarray:
    """R_ab = sum over the other qubits (and batch) of conj(lam_a) psi_b."""
    fl = np.conj(_flatten_pair(lam, qubits))
    fp = _flatten_pair(psi, qubits)
    size = fl.shape[0]
    r = np.empty((size, size), dtype=np.complex128)
    for a in range(size):
        for b in range(size):
            r[a, b] = np.sum(fl[a] * fp[b])
    return r


def _slot_derivatives(layout: CircuitLayout, params: np.ndarray):
    gates: List[Gate2Q] = []
    partials: List[np.ndarray] = []
    for slot, kind in layout.param_table_shape:
        values = layout.slot_values(params, slot)
        fp = build_with_partials(make_params(kind, values))
        gates.append(fp.unitary)
        partials.append(np.stack(fp.partials))
    return gates, partials


def adjoint_sweep(
    layout: CircuitLayout,
    params,
    psi_out: np.ndarray,
    lam: np.ndarray,
    *,
    gates: Optional[Sequence[Gate2Q]] = None,
    partials: Optional[Sequence[np.ndarray]] = None,
) -> np.ndarray:
    """2 Re <lam | d psi_out / d theta> for every real parameter."""
    p = layout.check_params(params)
    if gates is None or partials is None:
        gates, partials = _slot_derivatives(layout, p)
    offsets = layout.slot_offsets
    grad = np.zeros(layout.n_params)
    psi = psi_out
    for b in reversed(layout.bricks):
        u_dag = brick_matrix(b, gates).conj().T
        psi = apply_matrix_array(psi, u_dag, b.qubits)
        if b.param_slot is not None:
            r = reduced_outer(lam, psi, b.qubits)
            d = partials[b.param_slot]
            off = offsets[b.param_slot]
            grad[off : off + d.shape[0]] += 2.0 * np.real(np.einsum("kab,ab->k", d, r))
        lam = apply_matrix_array(lam, u_dag, b.qubits)
    return grad


def forward_with_derivatives(layout: CircuitLayout, params, psi_in: np.ndarray):
    p = layout.check_params(params)
    if psi_in.shape[0] != 1 << layout.n_qubits:
        raise DomainError(f"input of dimension {psi_in.shape[0]} for a {layout.n_qubits}-qubit layout")
    gates, partials = _slot_derivatives(layout, p)
    psi_out = apply_layout_array(layout, gates, psi_in)
    return p, gates, partials, psi_out


# ----------------------------
# Loss kinds
# ----------------------------
def grad_expectation(layout: CircuitLayout, params, input: StateVector, observable: Observable) -> GradResult:
    if observable.n_qubits != layout.n_qubits:
        raise DomainError("observable and layout disagree on qubit count")
    p, gates, partials, psi = forward_with_derivatives(layout, params, input.amplitudes)
    lam = observable.apply(psi)
    grad = adjoint_sweep(layout, p, psi, lam, gates=gates, partials=partials)
    return GradResult(float(observable.expectation(psi)), grad)


def grad_overlap(layout: CircuitLayout, params, input: StateVector, target: StateVector) -> GradResult:
    if target.n_qubits != layout.n_qubits:
        raise DomainError(f"{target.n_qubits}-qubit target for a {layout.n_qubits}-qubit layout")
    p, gates, partials, psi = forward_with_derivatives(layout, params, input.amplitudes)
    t = target.amplitudes
    ov = complex(np.sum(np.conj(t) * psi))
    # d(1 - |ov|^2) = -2 Re( conj(ov) <t| d psi> ) = 2 Re <lam | d psi>,  lam = -ov |t>
    lam = -ov * t
    grad = adjoint_sweep(layout, p, psi, lam, gates=gates, partials=partials)
    return GradResult(float(1.0 - abs(ov) ** 2), grad)


def grad_marginal(layout: CircuitLayout, params, input: StateVector) -> GradResult:
    if layout.readout is None:
        raise DomainError("layout has no readout qubit")
    p, gates, partials, psi = forward_with_derivatives(layout, params, input.amplitudes)
    mask = readout_mask(layout.n_qubits, layout.readout)
    lam = np.where(mask, psi, 0.0)
    grad = adjoint_sweep(layout, p, psi, lam, gates=gates, partials=partials)
    return GradResult(float(marginal_one_array(psi, layout.readout)), grad)


# ----------------------------
# Mini-batch losses
# ----------------------------
@dataclass(frozen=True)
class BatchResult:
    value: float
    grad: np.ndarray
    per_sample: np.ndarray


def batch_marginal_mse(layout: CircuitLayout, params, inputs: np.ndarray, labels: np.ndarray, *, with_grad: bool = True) -> BatchResult:
    """mean_b (P_b(readout=1) - y_b)^2 over column-batched inputs."""
    if layout.readout is None:
        raise DomainError("layout has no readout qubit")
    labels = np.asarray(labels, dtype=np.float64)
    p, gates, partials, psi = forward_with_derivatives(layout, params, inputs)
    probs = np.atleast_1d(marginal_one_array(psi, layout.readout))
    resid = probs - labels
    value = float(np.mean(resid**2))
    if not with_grad:
        return BatchResult(value, np.zeros(0), probs)
    mask = readout_mask(layout.n_qubits, layout.readout)
    weights = 2.0 * resid / resid.size
    lam = np.where(mask[:, None], psi, 0.0) * weights[None, :]
    grad = adjoint_sweep(layout, p, psi, lam, gates=gates, partials=partials)
    return BatchResult(value, grad, probs)


def batch_overlap_loss(layout: CircuitLayout, params, inputs: np.ndarray, targets: np.ndarray, *, with_grad: bool = True) -> BatchResult:
    """mean_b (1 - |<t_b|psi_b>|^2) over column-batched inputs and targets."""
    if targets.shape != inputs.shape:
        raise DomainError("targets and inputs must have matching shapes")
    p, gates, partials, psi = forward_with_derivatives(layout, params, inputs)
    ov = np.sum(np.conj(targets) * psi, axis=0)
    losses = 1.0 - np.abs(ov) ** 2
    value = float(np.mean(losses))
    if not with_grad:
        return BatchResult(value, np.zeros(0), losses)
    lam = -(ov / losses.size)[None, :] * targets
    grad = adjoint_sweep(layout, p, psi, lam, gates=gates, partials=partials)
    return BatchResult(value, grad, losses)
