# core/teacher_student.py
"""
Teacher-student experiments.

A randomly drawn teacher circuit labels a dataset of computational basis
states; a student of the same family is trained with Adam to reproduce the
labels. The teacher guarantees a zero-loss solution exists.

  - QCNN: labels are P(readout = 1); loss is the batch MSE; metric is the
    training accuracy (student and teacher agree on P(1) > 0.5, ties count
    as agreement).
  - Checkerboard: labels are the teacher output states; loss is
    1 - |<teacher|student>|^2 averaged over the batch; training stops early
    once a batch loss falls below `early_stop_loss`.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from core.circuits import build_checkerboard, build_qcnn, forward_array, random_params
from core.errors import DomainError
from core.gradients import batch_marginal_mse, batch_overlap_loss
from core.optim import AdamState, adam_step
from core.records import RunRecord, TrainingLog, derive_rng, make_run_id
from core.statevec import basis_batch, check_qubit_count

logger = logging.getLogger(__name__)

QCNN = "qcnn"
CHECKERBOARD = "checkerboard"

QCNN_LR = 0.001
CHECKERBOARD_LR_UNDER = 0.001
CHECKERBOARD_LR_OVER = 0.0001


@dataclass(frozen=True)
class TeacherStudentConfig:
    n_qubits: int
    kind: str = QCNN
    student_layers: int = 4
    teacher_layers: int = 4
    dataset_size: int = 512
    batch_size: int = 128
    epochs: int = 5000
    lr: Optional[float] = None
    seed: int = 0
    run_index: int = 0
    early_stop_loss: float = 0.001
    log_every: int = 10
    student_init: str = "random"  # "random" | "teacher"
    config_digest: str = ""

    def __post_init__(self) -> None:
        check_qubit_count(self.n_qubits)
        if self.kind not in (QCNN, CHECKERBOARD):
            raise DomainError(f"unknown teacher-student kind {self.kind!r}")
        if not self.dataset_size >= self.batch_size >= 1:
            raise DomainError("need dataset_size >= batch_size >= 1")
        if self.epochs < 0:
            raise DomainError("epochs must be >= 0")
        if self.log_every < 1:
            raise DomainError("log_every must be >= 1")
        if self.student_init not in ("random", "teacher"):
            raise DomainError(f"unknown student_init {self.student_init!r}")
        if self.kind == CHECKERBOARD and (self.student_layers < 1 or self.teacher_layers < 1):
            raise DomainError("checkerboard layers must be >= 1")

    @property
    def run_id(self) -> str:
        if self.kind == QCNN:
            return make_run_id("qcnn", self.n_qubits, 0, self.run_index)
        return make_run_id("cb", self.n_qubits, self.student_layers, self.run_index)


def sample_basis_dataset(n: int, count: int, rng: np.random.Generator) -> List[int]:
    """Uniform i.i.d. basis indices, drawn with replacement."""
    if count < 1:
        raise DomainError(f"dataset count must be >= 1, got {count}")
    n = check_qubit_count(n)
    return [int(i) for i in rng.integers(0, 1 << n, size=count)]


def qcnn_accuracy(student_probs: np.ndarray, teacher_probs: np.ndarray) -> float:
    s = np.asarray(student_probs) - 0.5
    t = np.asarray(teacher_probs) - 0.5
    agree = (np.sign(s) == np.sign(t)) | (s == 0.0) | (t == 0.0)
    return float(np.mean(agree))


def checkerboard_overparameterized(n_qubits: int, n_params: int) -> bool:
    return n_params >= 2 * 4**n_qubits


def _minibatches(rng: np.random.Generator, size: int, batch: int):
    order = rng.permutation(size)
    for start in range(0, size, batch):
        yield order[start : start + batch]


def _student_start(cfg: TeacherStudentConfig, teacher: np.ndarray, n_params: int, rng: np.random.Generator, random_draw) -> np.ndarray:
    if cfg.student_init == "random":
        return random_draw(rng)
    if n_params < teacher.size:
        raise DomainError("student is shallower than the teacher; cannot start at the teacher")
    # deeper students get identity rows appended
    return np.concatenate([teacher, np.zeros(n_params - teacher.size)])


# ----------------------------
# QCNN
# ----------------------------
def run_teacher_student_qcnn(cfg: TeacherStudentConfig) -> RunRecord:
    started = time.perf_counter()
    n = cfg.n_qubits
    layout = build_qcnn(n)
    teacher = random_params(layout, derive_rng(cfg.seed, cfg.run_index, "teacher"))
    indices = sample_basis_dataset(n, cfg.dataset_size, derive_rng(cfg.seed, cfg.run_index, "dataset"))
    inputs = basis_batch(n, indices)
    labels = batch_marginal_mse(layout, teacher, inputs, np.zeros(len(indices)), with_grad=False).per_sample

    student = _student_start(
        cfg,
        teacher,
        layout.n_params,
        derive_rng(cfg.seed, cfg.run_index, "student"),
        lambda r: random_params(layout, r),
    )
    batch_rng = derive_rng(cfg.seed, cfg.run_index, "batches")
    adam = AdamState.fresh(layout.n_params, cfg.lr if cfg.lr is not None else QCNN_LR)

    def evaluate(params: np.ndarray):
        res = batch_marginal_mse(layout, params, inputs, labels, with_grad=False)
        return res.value, qcnn_accuracy(res.per_sample, labels)

    log = TrainingLog()
    log.add(0, *evaluate(student))
    for epoch in range(1, cfg.epochs + 1):
        for idx in _minibatches(batch_rng, cfg.dataset_size, cfg.batch_size):
            res = batch_marginal_mse(layout, student, inputs[:, idx], labels[idx])
            adam, student = adam_step(adam, student, res.grad)
        if epoch % cfg.log_every == 0 or epoch == cfg.epochs:
            log.add(epoch, *evaluate(student))

    wall = time.perf_counter() - started
    logger.info("%s done: loss=%.3e accuracy=%.3f (%.1fs)", cfg.run_id, log.last[1], log.last[2], wall)
    return RunRecord.from_log(
        run_id=cfg.run_id,
        config_digest=cfg.config_digest,
        seed=cfg.seed,
        log=log,
        wall_time=wall,
        n_qubits=n,
        layers=layout.rows,
        run_index=cfg.run_index,
        extras={"n_params": layout.n_params},
    )


# ----------------------------
# Checkerboard
# ----------------------------
def run_teacher_student_checkerboard(cfg: TeacherStudentConfig) -> RunRecord:
    started = time.perf_counter()
    n = cfg.n_qubits
    teacher_layout = build_checkerboard(n, cfg.teacher_layers)
    student_layout = build_checkerboard(n, cfg.student_layers)
    teacher = random_params(teacher_layout, derive_rng(cfg.seed, cfg.run_index, "teacher"))
    indices = sample_basis_dataset(n, cfg.dataset_size, derive_rng(cfg.seed, cfg.run_index, "dataset"))
    inputs = basis_batch(n, indices)
    targets = forward_array(teacher_layout, teacher, inputs)

    student = _student_start(
        cfg,
        teacher,
        student_layout.n_params,
        derive_rng(cfg.seed, cfg.run_index, "student"),
        lambda r: random_params(student_layout, r),
    )
    over = checkerboard_overparameterized(n, student_layout.n_params)
    lr = cfg.lr if cfg.lr is not None else (CHECKERBOARD_LR_OVER if over else CHECKERBOARD_LR_UNDER)
    adam = AdamState.fresh(student_layout.n_params, lr)
    batch_rng = derive_rng(cfg.seed, cfg.run_index, "batches")

    def full_loss(params: np.ndarray) -> float:
        return batch_overlap_loss(student_layout, params, inputs, targets, with_grad=False).value

    log = TrainingLog()
    start_loss = full_loss(student)
    log.add(0, start_loss, start_loss)
    events = []
    batch_loss = start_loss
    stopped = False
    for epoch in range(1, cfg.epochs + 1):
        for idx in _minibatches(batch_rng, cfg.dataset_size, cfg.batch_size):
            res = batch_overlap_loss(student_layout, student, inputs[:, idx], targets[:, idx])
            batch_loss = res.value
            if batch_loss < cfg.early_stop_loss:
                stopped = True
                break
            adam, student = adam_step(adam, student, res.grad)
        if stopped:
            events.append({"event_type": "early_stop", "step": epoch, "batch_loss": batch_loss})
            logger.info("%s early stop at epoch %d (batch loss %.3e)", cfg.run_id, epoch, batch_loss)
            log.add(epoch, full_loss(student), batch_loss)
            break
        if epoch % cfg.log_every == 0 or epoch == cfg.epochs:
            log.add(epoch, full_loss(student), batch_loss)

    wall = time.perf_counter() - started
    return RunRecord.from_log(
        run_id=cfg.run_id,
        config_digest=cfg.config_digest,
        seed=cfg.seed,
        log=log,
        wall_time=wall,
        n_qubits=n,
        layers=cfg.student_layers,
        run_index=cfg.run_index,
        events=events,
        extras={"n_params": student_layout.n_params, "overparameterized": over, "early_stopped": stopped, "lr": lr},
    )


def run_teacher_student(cfg: TeacherStudentConfig) -> RunRecord:
    if cfg.kind == QCNN:
        return run_teacher_student_qcnn(cfg)
    return run_teacher_student_checkerboard(cfg)
