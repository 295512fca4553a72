# core/harness.py
"""
Run expansion and the worker pool.

A config expands into independent jobs (sizes x layers x run indices). Every
job derives its own RNG streams from (base_seed, run_index, tag), so results
do not depend on which worker ran them or in which order; outputs are always
returned sorted by run_id.
"""
from __future__ import annotations

import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Generic, List, Sequence, Tuple, TypeVar

from tqdm import tqdm

from core.errors import DomainError
from core.optim import LayerwiseSchedule
from core.records import RunRecord, make_run_id
from core.run_config import (
    CheckerboardBlock,
    LabConfig,
    QcnnBlock,
    VqeBlock,
    VqeLayerwiseBlock,
    sweep_values,
)
from core.teacher_student import CHECKERBOARD, QCNN, TeacherStudentConfig, run_teacher_student
from core.vqe import VqeConfig, run_vqe

logger = logging.getLogger(__name__)

T = TypeVar("T")

TRAINING_KINDS = ("teacher-student-qcnn", "teacher-student-checkerboard", "vqe", "vqe-layerwise")


@dataclass(frozen=True)
class Job(Generic[T]):
    run_id: str
    fn: Callable[[], T]


def progress_enabled(quiet: bool) -> bool:
    return not quiet and sys.stderr.isatty()


def run_pool(jobs: Sequence[Job[T]], threads: int = 1, *, desc: str = "runs", quiet: bool = False) -> List[Tuple[str, T]]:
    """Run jobs on at most `threads` workers; results come back sorted by run_id."""
    if threads < 1:
        raise DomainError("threads must be >= 1")
    ids = [j.run_id for j in jobs]
    if len(set(ids)) != len(ids):
        raise DomainError("duplicate run ids in one sweep")

    results: List[Tuple[str, T]] = []
    bar = tqdm(total=len(jobs), desc=desc, disable=not progress_enabled(quiet), file=sys.stderr)
    try:
        if threads == 1:
            for job in jobs:
                results.append((job.run_id, job.fn()))
                bar.update(1)
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                futures = [(job.run_id, pool.submit(job.fn)) for job in jobs]
                for run_id, fut in futures:
                    results.append((run_id, fut.result()))
                    bar.update(1)
    finally:
        bar.close()
    return sorted(results, key=lambda r: r[0])


# ----------------------------
# Training sweeps
# ----------------------------
def _logged(run_id: str, fn: Callable[[], RunRecord]) -> Callable[[], RunRecord]:
    def wrapped() -> RunRecord:
        logger.info("run %s started", run_id)
        rec = fn()
        logger.info("run %s finished in %.2fs (final loss %.3e)", run_id, rec.wall_time, rec.final_loss)
        return rec

    return wrapped


def _teacher_student_jobs(cfg: LabConfig, digest: str) -> List[Job[RunRecord]]:
    exp = cfg.experiment
    jobs = []
    if isinstance(exp, QcnnBlock):
        grid = [(n, 0) for n in sweep_values(exp.n_qubits)]
    else:
        grid = [(n, L) for n in sweep_values(exp.n_qubits) for L in sweep_values(exp.student_layers)]
    for n, L in grid:
        for r in range(cfg.n_runs):
            ts = TeacherStudentConfig(
                n_qubits=n,
                kind=QCNN if isinstance(exp, QcnnBlock) else CHECKERBOARD,
                student_layers=L if L else 4,
                teacher_layers=getattr(exp, "teacher_layers", 4),
                dataset_size=exp.dataset_size,
                batch_size=exp.batch_size,
                epochs=exp.epochs,
                lr=exp.lr,
                seed=cfg.base_seed,
                run_index=r,
                early_stop_loss=getattr(exp, "early_stop_loss", 0.001),
                log_every=exp.log_every,
                student_init=exp.student_init,
                config_digest=digest,
            )
            jobs.append(Job(ts.run_id, _logged(ts.run_id, lambda ts=ts: run_teacher_student(ts))))
    return jobs


def _vqe_jobs(cfg: LabConfig, digest: str) -> List[Job[RunRecord]]:
    exp = cfg.experiment
    jobs = []
    if isinstance(exp, VqeBlock):
        grid = [(n, L) for n in sweep_values(exp.n_qubits) for L in sweep_values(exp.ansatz_rows)]
    else:
        grid = [(n, 1) for n in sweep_values(exp.n_qubits)]
    for n, L in grid:
        for r in range(cfg.n_runs):
            if isinstance(exp, VqeBlock):
                vc = VqeConfig(
                    n_qubits=n,
                    target_rows=exp.target_rows,
                    ansatz_rows=L,
                    optimizer=exp.optimizer,
                    steps=exp.steps,
                    lr=exp.lr,
                    seed=cfg.base_seed,
                    run_index=r,
                    log_every=exp.log_every,
                    config_digest=digest,
                )
            else:
                schedule = LayerwiseSchedule(
                    steps_per_layer=exp.steps_per_layer,
                    lr_decay=exp.lr_decay,
                    max_layers=exp.max_layers,
                )
                vc = VqeConfig(
                    n_qubits=n,
                    target_rows=exp.target_rows,
                    ansatz_rows=1,
                    optimizer="adam",
                    steps=exp.steps,
                    lr=exp.lr,
                    seed=cfg.base_seed,
                    run_index=r,
                    layerwise=schedule,
                    log_every=exp.log_every,
                    config_digest=digest,
                )
            jobs.append(Job(vc.run_id, _logged(vc.run_id, lambda vc=vc: run_vqe(vc))))
    return jobs


def training_jobs(cfg: LabConfig, digest: str) -> List[Job[RunRecord]]:
    exp = cfg.experiment
    if isinstance(exp, (QcnnBlock, CheckerboardBlock)):
        return _teacher_student_jobs(cfg, digest)
    if isinstance(exp, (VqeBlock, VqeLayerwiseBlock)):
        return _vqe_jobs(cfg, digest)
    raise DomainError(f"{cfg.kind} is not a training sweep")


def run_training_sweep(cfg: LabConfig, digest: str, *, quiet: bool = False) -> List[RunRecord]:
    jobs = training_jobs(cfg, digest)
    logger.info("%s: %d runs on %d worker(s)", cfg.kind, len(jobs), cfg.threads)
    return [rec for _, rec in run_pool(jobs, cfg.threads, desc=cfg.kind, quiet=quiet)]


def landscape_run_id(target: str, n: int, layers: int, run_index: int) -> str:
    return make_run_id(f"ls{target}", n, layers, run_index)
