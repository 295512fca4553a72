# core/landscape.py
"""
Two-dimensional loss landscape slices around a parameter point.

Directions are filter-normalized per parameter slot: each slot block of a
standard-normal direction is rescaled to the Frobenius norm of the same
block of params0. Slots whose params0 block is all zeros keep the direction
as drawn and are reported in `skipped_slots`.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Protocol, Tuple

import numpy as np
import pandas as pd

from core.circuits import CircuitLayout, build_checkerboard, build_qcnn, forward_array, random_params
from core.errors import DomainError
from core.gradients import batch_marginal_mse, batch_overlap_loss
from core.records import derive_rng
from core.statevec import basis_batch
from core.teacher_student import sample_basis_dataset
from core.vqe import VqeTarget, build_vqe_target, vqe_energy_and_grad

logger = logging.getLogger(__name__)


# ----------------------------
# Loss batches
# ----------------------------
class LossBatch(Protocol):
    def loss(self, layout: CircuitLayout, params: np.ndarray) -> float: ...


@dataclass(frozen=True)
class MarginalBatch:
    inputs: np.ndarray
    labels: np.ndarray

    def loss(self, layout: CircuitLayout, params: np.ndarray) -> float:
        return batch_marginal_mse(layout, params, self.inputs, self.labels, with_grad=False).value


@dataclass(frozen=True)
class OverlapBatch:
    inputs: np.ndarray
    targets: np.ndarray

    def loss(self, layout: CircuitLayout, params: np.ndarray) -> float:
        return batch_overlap_loss(layout, params, self.inputs, self.targets, with_grad=False).value


@dataclass(frozen=True)
class EnergyBatch:
    target: VqeTarget

    def loss(self, layout: CircuitLayout, params: np.ndarray) -> float:
        return vqe_energy_and_grad(self.target, layout, params).value


# ----------------------------
# Slice
# ----------------------------
@dataclass
class LandscapeSlice:
    table: pd.DataFrame
    center_loss: float
    skipped_slots: List[int] = field(default_factory=list)


def filter_normalized_direction(layout: CircuitLayout, params0: np.ndarray, rng: np.random.Generator) -> Tuple[np.ndarray, List[int]]:
    p0 = layout.check_params(params0)
    direction = rng.standard_normal(layout.n_params)
    skipped: List[int] = []
    for slot, _ in layout.param_table_shape:
        off = layout.slot_offsets[slot]
        size = layout.slot_sizes[slot]
        block = direction[off : off + size]
        ref = float(np.linalg.norm(p0[off : off + size]))
        dnorm = float(np.linalg.norm(block))
        if ref == 0.0 or dnorm == 0.0:
            skipped.append(slot)
            logger.debug("slot %d has zero norm; direction left unscaled", slot)
            continue
        direction[off : off + size] = block * (ref / dnorm)
    return direction, skipped


def grid_offsets(grid_half_width: float, grid_points: int) -> np.ndarray:
    """Symmetric offsets whose middle entry is exactly 0.0."""
    half = grid_points // 2
    if half == 0:
        return np.zeros(1)
    return grid_half_width * (np.arange(grid_points) - half) / half


def landscape_slice(
    layout: CircuitLayout,
    params0,
    rng: np.random.Generator,
    grid_half_width: float,
    grid_points: int,
    batch: LossBatch,
) -> LandscapeSlice:
    if grid_points < 1 or grid_points % 2 == 0:
        raise DomainError(f"grid_points must be odd, got {grid_points}")
    if grid_half_width <= 0:
        raise DomainError("grid_half_width must be positive")
    p0 = layout.check_params(params0)
    d1, skipped1 = filter_normalized_direction(layout, p0, rng)
    d2, skipped2 = filter_normalized_direction(layout, p0, rng)
    offsets = grid_offsets(grid_half_width, grid_points)

    rows = []
    for x in offsets:
        for y in offsets:
            loss = batch.loss(layout, p0 + x * d1 + y * d2)
            rows.append({"x": float(x), "y": float(y), "loss": float(loss)})
    table = pd.DataFrame(rows, columns=["x", "y", "loss"])
    mid = (grid_points // 2) * grid_points + grid_points // 2
    return LandscapeSlice(
        table=table,
        center_loss=float(table["loss"].iloc[mid]),
        skipped_slots=sorted(set(skipped1) | set(skipped2)),
    )


# ----------------------------
# Problem builders
# ----------------------------
@dataclass(frozen=True)
class LandscapeProblem:
    layout: CircuitLayout
    params0: np.ndarray
    batch: LossBatch
    teacher: np.ndarray


def build_landscape_problem(
    target: str,
    n_qubits: int,
    *,
    layers: int = 4,
    target_rows: int = 4,
    batch_size: int = 128,
    center: str = "teacher",
    seed: int = 0,
    run_index: int = 0,
) -> LandscapeProblem:
    """
    target: "qcnn" | "checkerboard" | "vqe"
    center: "teacher" (planted optimum; for VQE the ansatz that undoes the
            conjugation is not trainable, so "teacher" falls back to random)
            | "random"
    """
    if center not in ("teacher", "random"):
        raise DomainError(f"unknown landscape center {center!r}")
    if target == "vqe":
        vqe_target = build_vqe_target(n_qubits, target_rows, derive_rng(seed, run_index, "target"))
        layout = build_checkerboard(n_qubits, layers)
        params0 = random_params(layout, derive_rng(seed, run_index, "ansatz"))
        return LandscapeProblem(layout, params0, EnergyBatch(vqe_target), params0)

    if target == "qcnn":
        layout = build_qcnn(n_qubits)
    elif target == "checkerboard":
        layout = build_checkerboard(n_qubits, layers)
    else:
        raise DomainError(f"unknown landscape target {target!r}")
    teacher = random_params(layout, derive_rng(seed, run_index, "teacher"))
    indices = sample_basis_dataset(n_qubits, batch_size, derive_rng(seed, run_index, "dataset"))
    inputs = basis_batch(n_qubits, indices)
    if target == "qcnn":
        labels = batch_marginal_mse(layout, teacher, inputs, np.zeros(batch_size), with_grad=False).per_sample
        batch: LossBatch = MarginalBatch(inputs, labels)
    else:
        batch = OverlapBatch(inputs, forward_array(layout, teacher, inputs))
    params0 = teacher if center == "teacher" else random_params(layout, derive_rng(seed, run_index, "student"))
    return LandscapeProblem(layout, params0, batch, teacher)
