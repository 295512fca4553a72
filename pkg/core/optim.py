# core/optim.py
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from core.circuits import CircuitLayout, append_checkerboard_row
from core.errors import DomainError

logger = logging.getLogger(__name__)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

STEPS_PER_LAYER = 5000
LR_DECAY = 0.95


def _same_length(params: np.ndarray, grad: np.ndarray) -> None:
    if params.shape != grad.shape:
        raise DomainError(f"params {params.shape} and grad {grad.shape} differ in shape")


# ----------------------------
# Gradient descent
# ----------------------------
def gd_step(params, grad, lr: float) -> np.ndarray:
    p = np.asarray(params, dtype=np.float64)
    g = np.asarray(grad, dtype=np.float64)
    _same_length(p, g)
    return p - lr * g


# ----------------------------
# Adam
# ----------------------------
@dataclass(frozen=True)
class AdamState:
    step: int
    first_moment: np.ndarray
    second_moment: np.ndarray
    lr: float
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPS

    def __post_init__(self) -> None:
        if self.step < 0:
            raise DomainError("Adam step count must be >= 0")
        if self.first_moment.shape != self.second_moment.shape:
            raise DomainError("Adam moments differ in shape")

    @classmethod
    def fresh(cls, dim: int, lr: float, *, beta1: float = ADAM_BETA1, beta2: float = ADAM_BETA2, eps: float = ADAM_EPS) -> "AdamState":
        return cls(0, np.zeros(dim), np.zeros(dim), float(lr), beta1, beta2, eps)

    @property
    def dim(self) -> int:
        return int(self.first_moment.size)

    def extended(self, extra: int) -> "AdamState":
        """Moments padded with zeros for `extra` new parameters; step kept."""
        return replace(
            self,
            first_moment=np.concatenate([self.first_moment, np.zeros(extra)]),
            second_moment=np.concatenate([self.second_moment, np.zeros(extra)]),
        )

    def scaled_lr(self, factor: float) -> "AdamState":
        return replace(self, lr=self.lr * factor)


def adam_step(state: AdamState, params, grad) -> Tuple[AdamState, np.ndarray]:
    p = np.asarray(params, dtype=np.float64)
    g = np.asarray(grad, dtype=np.float64)
    _same_length(p, g)
    if p.size != state.dim:
        raise DomainError(f"Adam state has {state.dim} entries, params have {p.size}")
    t = state.step + 1
    m = state.beta1 * state.first_moment + (1.0 - state.beta1) * g
    v = state.beta2 * state.second_moment + (1.0 - state.beta2) * (g * g)
    m_hat = m / (1.0 - state.beta1**t)
    v_hat = v / (1.0 - state.beta2**t)
    new_p = p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return replace(state, step=t, first_moment=m, second_moment=v), new_p


# ----------------------------
# Layer-wise growth
# ----------------------------
@dataclass(frozen=True)
class LayerwiseSchedule:
    steps_per_layer: int = STEPS_PER_LAYER
    lr_decay: float = LR_DECAY
    max_layers: int = 20
    current_layer: int = 1

    def __post_init__(self) -> None:
        if not 0.0 < self.lr_decay <= 1.0:
            raise DomainError(f"lr_decay must be in (0, 1], got {self.lr_decay}")
        if self.steps_per_layer < 1:
            raise DomainError("steps_per_layer must be >= 1")
        if self.current_layer > self.max_layers:
            raise DomainError("current_layer exceeds max_layers")

    @property
    def exhausted(self) -> bool:
        return self.current_layer >= self.max_layers


@dataclass(frozen=True)
class GrowthOutcome:
    layout: CircuitLayout
    params: np.ndarray
    lr_multiplier: float
    schedule: LayerwiseSchedule
    grew: bool = False
    exhausted: bool = False

    def __iter__(self):
        # unpacks as (layout, params, lr_multiplier)
        return iter((self.layout, self.params, self.lr_multiplier))


def maybe_grow(schedule: LayerwiseSchedule, global_step: int, layout: CircuitLayout, params) -> GrowthOutcome:
    """
    At positive multiples of steps_per_layer append one identity row
    (all-zero params32 slots) and hand back the lr multiplier; otherwise a
    no-op with multiplier 1.
    """
    if layout.family != "checkerboard":
        raise DomainError("layer-wise growth needs a checkerboard layout")
    p = layout.check_params(params)
    at_boundary = global_step > 0 and global_step % schedule.steps_per_layer == 0
    if not at_boundary:
        return GrowthOutcome(layout, p, 1.0, schedule)
    if schedule.exhausted:
        return GrowthOutcome(layout, p, 1.0, schedule, exhausted=True)
    grown = append_checkerboard_row(layout)
    new_params = np.concatenate([p, np.zeros(grown.n_params - layout.n_params)])
    new_schedule = replace(schedule, current_layer=schedule.current_layer + 1)
    logger.info(
        "growth at step %d: %d -> %d rows, %d params",
        global_step,
        layout.rows,
        grown.rows,
        grown.n_params,
    )
    return GrowthOutcome(grown, new_params, schedule.lr_decay, new_schedule, grew=True)
