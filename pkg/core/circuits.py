# core/circuits.py
"""
Circuit layouts and forward simulation.

A layout is an ordered list of bricks. Trainable bricks point at a slot of a
flat real parameter vector (slots may be shared); fixed bricks carry their
own gate. Parameter vectors are plain float arrays laid out slot by slot in
`param_table_shape` order.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.errors import DomainError
from core.paramgate import PARAM_SIZES, PARAMS16, PARAMS32, build_unitary, make_params
from core.statevec import Gate1Q, Gate2Q, StateVector, apply_matrix_array, check_qubit_count

logger = logging.getLogger(__name__)

FixedGate = Union[Gate2Q, Gate1Q]


# ----------------------------
# Types
# ----------------------------
@dataclass(frozen=True)
class Brick:
    layer: int
    qubits: Tuple[int, ...]
    param_slot: Optional[int] = None
    fixed_gate: Optional[FixedGate] = None

    def __post_init__(self) -> None:
        qubits = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qubits)
        if (self.param_slot is None) == (self.fixed_gate is None):
            raise DomainError("a brick needs exactly one of param_slot / fixed_gate")
        if len(qubits) == 2:
            if qubits[0] == qubits[1]:
                raise DomainError(f"brick acts twice on qubit {qubits[0]}")
        elif len(qubits) == 1:
            if self.fixed_gate is None:
                raise DomainError("single-qubit bricks must be fixed")
        else:
            raise DomainError(f"bricks act on 1 or 2 qubits, got {qubits}")
        if self.fixed_gate is not None and self.fixed_gate.n_targets != len(qubits):
            raise DomainError("fixed gate width does not match brick qubits")

    @property
    def trainable(self) -> bool:
        return self.param_slot is not None


@dataclass(frozen=True)
class CircuitLayout:
    n_qubits: int
    bricks: Tuple[Brick, ...]
    param_table_shape: Tuple[Tuple[int, str], ...] = ()
    readout: Optional[int] = None
    family: str = "custom"
    rows: int = 0
    pooled: Tuple[Tuple[int, Tuple[int, ...]], ...] = field(default=())

    def __post_init__(self) -> None:
        check_qubit_count(self.n_qubits)
        object.__setattr__(self, "bricks", tuple(self.bricks))
        object.__setattr__(self, "param_table_shape", tuple((int(s), str(k)) for s, k in self.param_table_shape))
        slots = [s for s, _ in self.param_table_shape]
        if slots != list(range(len(slots))):
            raise DomainError("parameter slots must be numbered 0..k-1 in order")
        for _, kind in self.param_table_shape:
            if kind not in PARAM_SIZES:
                raise DomainError(f"unknown parameter kind {kind!r}")
        for b in self.bricks:
            for q in b.qubits:
                if not 0 <= q < self.n_qubits:
                    raise DomainError(f"brick qubit {q} out of range for {self.n_qubits} qubits")
            if b.param_slot is not None and not 0 <= b.param_slot < len(slots):
                raise DomainError(f"brick references missing slot {b.param_slot}")
            if b.param_slot is not None and len(b.qubits) != 2:
                raise DomainError("trainable bricks act on two qubits")
        if self.readout is not None and not 0 <= self.readout < self.n_qubits:
            raise DomainError(f"readout qubit {self.readout} out of range")

    # parameter table
    @property
    def slot_sizes(self) -> List[int]:
        return [PARAM_SIZES[k] for _, k in self.param_table_shape]

    @property
    def slot_offsets(self) -> List[int]:
        offsets, acc = [], 0
        for size in self.slot_sizes:
            offsets.append(acc)
            acc += size
        return offsets

    @property
    def n_params(self) -> int:
        return int(sum(self.slot_sizes))

    @property
    def is_fixed(self) -> bool:
        return not self.param_table_shape and all(not b.trainable for b in self.bricks)

    def check_params(self, params) -> np.ndarray:
        p = np.asarray(params, dtype=np.float64).reshape(-1) if params is not None else np.zeros(0)
        if p.size != self.n_params:
            raise DomainError(f"layout expects {self.n_params} parameters, got {p.size}")
        return p

    def slot_values(self, params: np.ndarray, slot: int) -> np.ndarray:
        off = self.slot_offsets[slot]
        return params[off : off + self.slot_sizes[slot]]

    def unflatten(self, params) -> list:
        p = self.check_params(params)
        return [make_params(kind, self.slot_values(p, slot)) for slot, kind in self.param_table_shape]

    def prefix(self, max_layer: int) -> "CircuitLayout":
        """Same table, only bricks with layer <= max_layer."""
        return replace(self, bricks=tuple(b for b in self.bricks if b.layer <= max_layer))

    @property
    def depth(self) -> int:
        return 1 + max((b.layer for b in self.bricks), default=-1)


# ----------------------------
# Builders
# ----------------------------
def checkerboard_row_pairs(n: int, row: int) -> List[Tuple[int, int]]:
    off = row % 2
    return [((2 * k + off) % n, (2 * k + 1 + off) % n) for k in range(n // 2)]


def build_checkerboard(n: int, L: int) -> CircuitLayout:
    if n < 2:
        raise DomainError(f"checkerboard needs n >= 2, got {n}")
    if L < 1:
        raise DomainError(f"checkerboard needs L >= 1, got {L}")
    bricks: List[Brick] = []
    table: List[Tuple[int, str]] = []
    for r in range(L):
        for pair in checkerboard_row_pairs(n, r):
            slot = len(table)
            table.append((slot, PARAMS32))
            bricks.append(Brick(layer=r, qubits=pair, param_slot=slot))
    return CircuitLayout(n, tuple(bricks), tuple(table), readout=0, family="checkerboard", rows=L)


def append_checkerboard_row(layout: CircuitLayout) -> CircuitLayout:
    if layout.family != "checkerboard":
        raise DomainError("only checkerboard layouts can grow")
    r = layout.rows
    bricks = list(layout.bricks)
    table = list(layout.param_table_shape)
    for pair in checkerboard_row_pairs(layout.n_qubits, r):
        slot = len(table)
        table.append((slot, PARAMS32))
        bricks.append(Brick(layer=r, qubits=pair, param_slot=slot))
    return replace(layout, bricks=tuple(bricks), param_table_shape=tuple(table), rows=r + 1)


def qcnn_depth(n: int) -> int:
    return int(math.ceil(math.log2(n))) if n > 1 else 0


def build_qcnn(n: int) -> CircuitLayout:
    """
    Convolution layers share one params16 slot each; after every layer the
    odd-position active qubits are pooled (dropped, never touched again).
    """
    if n < 2:
        raise DomainError(f"QCNN needs n >= 2, got {n}")
    active = list(range(n))
    bricks: List[Brick] = []
    table: List[Tuple[int, str]] = []
    pooled: List[Tuple[int, Tuple[int, ...]]] = []
    for layer in range(qcnn_depth(n)):
        table.append((layer, PARAMS16))
        m = len(active)
        if m == 2:
            pairs = [(active[0], active[1])]
        else:
            cyclic = [(active[i], active[(i + 1) % m]) for i in range(m)]
            pairs = cyclic[0::2] + cyclic[1::2]
        for pair in pairs:
            bricks.append(Brick(layer=layer, qubits=pair, param_slot=layer))
        pooled.append((layer, tuple(active[1::2])))
        active = active[0::2]
    return CircuitLayout(
        n,
        tuple(bricks),
        tuple(table),
        readout=active[0],
        family="qcnn",
        rows=qcnn_depth(n),
        pooled=tuple(pooled),
    )


def build_fixed(n: int, rows: Sequence[Sequence[Tuple[Tuple[int, ...], FixedGate]]], *, readout: Optional[int] = None) -> CircuitLayout:
    """Non-trainable circuit from rows of (qubits, gate)."""
    bricks = [
        Brick(layer=r, qubits=tuple(qubits), fixed_gate=gate)
        for r, row in enumerate(rows)
        for qubits, gate in row
    ]
    return CircuitLayout(n, tuple(bricks), (), readout=readout, family="fixed", rows=len(rows))


# ----------------------------
# Forward simulation
# ----------------------------
def slot_gates(layout: CircuitLayout, params) -> List[Gate2Q]:
    return [build_unitary(p) for p in layout.unflatten(params)]


def brick_matrix(brick: Brick, gates: Sequence[Gate2Q]) -> np.ndarray:
    if brick.fixed_gate is not None:
        return brick.fixed_gate.matrix
    return gates[brick.param_slot].matrix


def apply_layout_array(layout: CircuitLayout, gates: Sequence[Gate2Q], psi: np.ndarray, *, inverse: bool = False) -> np.ndarray:
    """Run every brick on a state (or column batch); `inverse` applies U^dag in reverse order."""
    out = psi
    if inverse:
        for b in reversed(layout.bricks):
            out = apply_matrix_array(out, brick_matrix(b, gates).conj().T, b.qubits)
    else:
        for b in layout.bricks:
            out = apply_matrix_array(out, brick_matrix(b, gates), b.qubits)
    return out


def forward_array(layout: CircuitLayout, params, psi: np.ndarray) -> np.ndarray:
    if psi.shape[0] != 1 << layout.n_qubits:
        raise DomainError(f"input of dimension {psi.shape[0]} for a {layout.n_qubits}-qubit layout")
    return apply_layout_array(layout, slot_gates(layout, params), psi)


def forward(layout: CircuitLayout, params, input: StateVector) -> StateVector:
    if input.n_qubits != layout.n_qubits:
        raise DomainError(f"{input.n_qubits}-qubit input for a {layout.n_qubits}-qubit layout")
    return StateVector(layout.n_qubits, forward_array(layout, params, input.amplitudes))


def random_params(layout: CircuitLayout, rng: np.random.Generator) -> np.ndarray:
    """Standard-normal parameter vector, drawn slot by slot."""
    return np.concatenate([rng.standard_normal(size) for size in layout.slot_sizes]) if layout.slot_sizes else np.zeros(0)


def zero_params(layout: CircuitLayout) -> np.ndarray:
    return np.zeros(layout.n_params)


def describe(layout: CircuitLayout) -> Dict[str, object]:
    return {
        "family": layout.family,
        "n_qubits": layout.n_qubits,
        "rows": layout.rows,
        "bricks": len(layout.bricks),
        "n_params": layout.n_params,
        "readout": layout.readout,
    }
