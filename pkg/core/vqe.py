# core/vqe.py
"""
VQE against a conjugated sum-of-Z Hamiltonian.

    H = C^dag (sum_i Z_i) C + n I

C is a fixed brick circuit with random gates exp(G - G^dag). The ground state
is C^dag |1...1> with energy exactly 0, so the energy doubles as the loss.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from core.circuits import (
    CircuitLayout,
    apply_layout_array,
    build_checkerboard,
    build_fixed,
    checkerboard_row_pairs,
    forward,
    random_params,
)
from core.errors import DomainError
from core.gradients import GradResult, SumZ, adjoint_sweep, forward_with_derivatives
from core.optim import AdamState, LayerwiseSchedule, adam_step, gd_step, maybe_grow
from core.paramgate import PARAMS32, build_unitary32, init_params
from core.records import RunRecord, TrainingLog, derive_rng, make_run_id
from core.statevec import StateVector, basis_state, check_qubit_count

logger = logging.getLogger(__name__)

GD_LR = 0.01
ADAM_LR = 0.003
LAYERWISE_LR = 0.002


@dataclass(frozen=True)
class VqeTarget:
    n_qubits: int
    conjugation: CircuitLayout
    shift: float

    def __post_init__(self) -> None:
        if not self.conjugation.is_fixed:
            raise DomainError("VQE conjugation circuit must contain fixed bricks only")
        if self.conjugation.n_qubits != self.n_qubits:
            raise DomainError("conjugation circuit acts on the wrong number of qubits")

    @property
    def observable(self) -> SumZ:
        return SumZ(self.n_qubits, self.shift)


@dataclass(frozen=True)
class VqeConfig:
    n_qubits: int
    target_rows: int = 4
    ansatz_rows: int = 4
    optimizer: str = "gd"  # "gd" | "adam"
    steps: int = 30000
    lr: Optional[float] = None
    seed: int = 0
    run_index: int = 0
    layerwise: Optional[LayerwiseSchedule] = None
    log_every: int = 100
    config_digest: str = ""

    def __post_init__(self) -> None:
        check_qubit_count(self.n_qubits)
        if self.n_qubits < 2:
            raise DomainError("VQE needs at least 2 qubits")
        if self.ansatz_rows < 1:
            raise DomainError("ansatz_rows must be >= 1")
        if self.steps < 1:
            raise DomainError("steps must be >= 1")
        if self.target_rows < 0:
            raise DomainError("target_rows must be >= 0")
        if self.optimizer not in ("gd", "adam"):
            raise DomainError(f"unknown optimizer {self.optimizer!r}")
        if self.log_every < 1:
            raise DomainError("log_every must be >= 1")

    @property
    def resolved_lr(self) -> float:
        if self.lr is not None:
            return float(self.lr)
        if self.layerwise is not None:
            return LAYERWISE_LR
        return GD_LR if self.optimizer == "gd" else ADAM_LR

    @property
    def run_id(self) -> str:
        prefix = "vqelw" if self.layerwise is not None else f"vqe{self.optimizer}"
        return make_run_id(prefix, self.n_qubits, self.ansatz_rows, self.run_index)


# ----------------------------
# Target
# ----------------------------
def build_vqe_target(n: int, target_rows: int, rng: np.random.Generator) -> VqeTarget:
    """target_rows = 0 is accepted and gives H = sum Z + n I."""
    if target_rows < 0:
        raise DomainError("target_rows must be >= 0")
    rows = []
    for r in range(target_rows):
        rows.append([(pair, build_unitary32(init_params(PARAMS32, rng))) for pair in checkerboard_row_pairs(n, r)])
    return VqeTarget(n, build_fixed(n, rows), float(n))


def ground_state(target: VqeTarget) -> StateVector:
    top = basis_state(target.n_qubits, (1 << target.n_qubits) - 1).amplitudes
    return StateVector(target.n_qubits, apply_layout_array(target.conjugation, [], top, inverse=True))


def target_energy(target: VqeTarget, state: StateVector) -> float:
    phi = apply_layout_array(target.conjugation, [], state.amplitudes)
    return float(target.observable.expectation(phi))


def dense_hamiltonian(target: VqeTarget) -> np.ndarray:
    """Dense 2^n x 2^n H (small n only)."""
    n = target.n_qubits
    c = apply_layout_array(target.conjugation, [], np.eye(1 << n, dtype=np.complex128))
    diag = target.observable.apply(np.eye(1 << n, dtype=np.complex128))
    return c.conj().T @ diag @ c + target.shift * np.eye(1 << n)


def vqe_energy_and_grad(target: VqeTarget, ansatz: CircuitLayout, params) -> GradResult:
    if ansatz.n_qubits != target.n_qubits:
        raise DomainError(f"{ansatz.n_qubits}-qubit ansatz for a {target.n_qubits}-qubit target")
    zero = basis_state(target.n_qubits, 0).amplitudes
    p, gates, partials, psi = forward_with_derivatives(ansatz, params, zero)
    phi = apply_layout_array(target.conjugation, [], psi)
    obs = target.observable
    lam = apply_layout_array(target.conjugation, [], obs.apply(phi), inverse=True)
    grad = adjoint_sweep(ansatz, p, psi, lam, gates=gates, partials=partials)
    return GradResult(float(obs.expectation(phi)), grad)


def ansatz_state(ansatz: CircuitLayout, params) -> StateVector:
    return forward(ansatz, params, basis_state(ansatz.n_qubits, 0))


def trace_distance_to_ground(state: StateVector, target: VqeTarget) -> float:
    if state.n_qubits != target.n_qubits:
        raise DomainError("state and target disagree on qubit count")
    g = ground_state(target).amplitudes
    fid = abs(complex(np.sum(np.conj(g) * state.amplitudes))) ** 2
    return float(np.sqrt(max(0.0, 1.0 - fid)))


def overparameterized_flag(n_qubits: int, n_params: int) -> bool:
    return n_params >= 4 * 2**n_qubits


# ----------------------------
# Harnesses
# ----------------------------
def _metric(ansatz: CircuitLayout, params: np.ndarray, target: VqeTarget) -> float:
    return trace_distance_to_ground(ansatz_state(ansatz, params), target)


def run_vqe(cfg: VqeConfig) -> RunRecord:
    if cfg.layerwise is not None:
        return run_vqe_layerwise(cfg)
    started = time.perf_counter()
    target = build_vqe_target(cfg.n_qubits, cfg.target_rows, derive_rng(cfg.seed, cfg.run_index, "target"))
    ansatz = build_checkerboard(cfg.n_qubits, cfg.ansatz_rows)
    params = random_params(ansatz, derive_rng(cfg.seed, cfg.run_index, "ansatz"))
    lr = cfg.resolved_lr
    adam = AdamState.fresh(ansatz.n_params, lr) if cfg.optimizer == "adam" else None

    log = TrainingLog()
    for step in range(cfg.steps):
        res = vqe_energy_and_grad(target, ansatz, params)
        if step % cfg.log_every == 0:
            log.add(step, res.value, _metric(ansatz, params, target))
        if adam is None:
            params = gd_step(params, res.grad, lr)
        else:
            adam, params = adam_step(adam, params, res.grad)
    final = vqe_energy_and_grad(target, ansatz, params)
    log.add(cfg.steps, final.value, _metric(ansatz, params, target))

    wall = time.perf_counter() - started
    logger.info("%s done: energy=%.3e trace distance=%.3e (%.1fs)", cfg.run_id, log.last[1], log.last[2], wall)
    return RunRecord.from_log(
        run_id=cfg.run_id,
        config_digest=cfg.config_digest,
        seed=cfg.seed,
        log=log,
        wall_time=wall,
        n_qubits=cfg.n_qubits,
        layers=cfg.ansatz_rows,
        run_index=cfg.run_index,
        extras={
            "n_params": ansatz.n_params,
            "optimizer": cfg.optimizer,
            "lr": lr,
            "target_rows": cfg.target_rows,
            "expressible": cfg.ansatz_rows >= cfg.target_rows,
            "overparameterized": overparameterized_flag(cfg.n_qubits, ansatz.n_params),
        },
    )


def run_vqe_layerwise(cfg: VqeConfig) -> RunRecord:
    """Start at one row, grow by an identity row every steps_per_layer steps."""
    schedule = cfg.layerwise or LayerwiseSchedule()
    started = time.perf_counter()
    target = build_vqe_target(cfg.n_qubits, cfg.target_rows, derive_rng(cfg.seed, cfg.run_index, "target"))
    ansatz = build_checkerboard(cfg.n_qubits, schedule.current_layer)
    params = random_params(ansatz, derive_rng(cfg.seed, cfg.run_index, "ansatz"))
    adam = AdamState.fresh(ansatz.n_params, cfg.resolved_lr)

    log = TrainingLog()
    events = []
    exhausted_logged = False
    for step in range(cfg.steps):
        outcome = maybe_grow(schedule, step, ansatz, params)
        grew = outcome.grew
        if grew:
            before = vqe_energy_and_grad(target, ansatz, params).value
            ansatz, params, schedule = outcome.layout, outcome.params, outcome.schedule
            adam = adam.extended(ansatz.n_params - adam.dim).scaled_lr(outcome.lr_multiplier)
        elif outcome.exhausted and not exhausted_logged:
            events.append({"event_type": "schedule_exhausted", "step": step, "rows": ansatz.rows})
            exhausted_logged = True
        res = vqe_energy_and_grad(target, ansatz, params)
        if grew:
            events.append(
                {
                    "event_type": "growth",
                    "step": step,
                    "rows": ansatz.rows,
                    "n_params": ansatz.n_params,
                    "loss_before": before,
                    "loss_after": res.value,
                    "lr": adam.lr,
                }
            )
        if step % cfg.log_every == 0 or grew:
            log.add(step, res.value, _metric(ansatz, params, target))
        adam, params = adam_step(adam, params, res.grad)
    final = vqe_energy_and_grad(target, ansatz, params)
    log.add(cfg.steps, final.value, _metric(ansatz, params, target))

    wall = time.perf_counter() - started
    logger.info("%s done at %d rows: energy=%.3e (%.1fs)", cfg.run_id, ansatz.rows, log.last[1], wall)
    return RunRecord.from_log(
        run_id=cfg.run_id,
        config_digest=cfg.config_digest,
        seed=cfg.seed,
        log=log,
        wall_time=wall,
        n_qubits=cfg.n_qubits,
        layers=ansatz.rows,
        run_index=cfg.run_index,
        events=events,
        extras={
            "n_params": ansatz.n_params,
            "target_rows": cfg.target_rows,
            "final_rows": ansatz.rows,
            "expressible": ansatz.rows >= cfg.target_rows,
            "overparameterized": overparameterized_flag(cfg.n_qubits, ansatz.n_params),
        },
    )
