# core/records.py
from __future__ import annotations

import logging
import zlib
from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

import numpy as np

from core.errors import DomainError

logger = logging.getLogger(__name__)

LogRow = Tuple[int, float, float]


# ----------------------------
# Seeded streams
# ----------------------------
def seed_entropy(base_seed: int, run_index: int, tag: str) -> List[int]:
    """
    Mixing function for per-run streams:
      SeedSequence([base_seed, run_index, crc32(tag)])
    Distinct (run_index, tag) pairs never share a stream.
    """
    return [int(base_seed) & 0xFFFFFFFFFFFFFFFF, int(run_index), zlib.crc32(tag.encode("utf-8"))]


def derive_rng(base_seed: int, run_index: int, tag: str) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed_entropy(base_seed, run_index, tag))))


# ----------------------------
# Training log
# ----------------------------
class TrainingLog:
    """Append-only (step, loss, metric) rows with strictly increasing steps."""

    def __init__(self) -> None:
        self.rows: List[LogRow] = []

    def add(self, step: int, loss: float, metric: float) -> None:
        if self.rows and step <= self.rows[-1][0]:
            raise DomainError(f"log step {step} does not follow {self.rows[-1][0]}")
        self.rows.append((int(step), float(loss), float(metric)))

    @property
    def last(self) -> LogRow:
        return self.rows[-1]

    def __len__(self) -> int:
        return len(self.rows)


# ----------------------------
# Run record
# ----------------------------
@dataclass
class RunRecord:
    run_id: str
    config_digest: str
    seed: int
    log: List[LogRow]
    final: Tuple[float, float]
    wall_time: float
    n_qubits: int = 0
    layers: int = 0
    run_index: int = 0
    events: List[Dict[str, Any]] = field(default_factory=list)
    extras: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        steps = [r[0] for r in self.log]
        if any(b <= a for a, b in zip(steps, steps[1:])):
            raise DomainError(f"run {self.run_id}: log steps are not strictly increasing")
        if self.log and tuple(self.final) != tuple(self.log[-1][1:]):
            raise DomainError(f"run {self.run_id}: final does not equal the last log row")

    @classmethod
    def from_log(cls, *, run_id: str, config_digest: str, seed: int, log: TrainingLog, wall_time: float, **kw) -> "RunRecord":
        last = log.last
        return cls(
            run_id=run_id,
            config_digest=config_digest,
            seed=seed,
            log=list(log.rows),
            final=(last[1], last[2]),
            wall_time=float(wall_time),
            **kw,
        )

    @property
    def final_loss(self) -> float:
        return self.final[0]

    @property
    def final_metric(self) -> float:
        return self.final[1]

    def summary(self) -> Dict[str, Any]:
        return {
            "run_id": self.run_id,
            "seed": self.seed,
            "run_index": self.run_index,
            "n_qubits": self.n_qubits,
            "layers": self.layers,
            "final_loss": self.final_loss,
            "final_metric": self.final_metric,
            "wall_time": self.wall_time,
            **self.extras,
        }


def make_run_id(prefix: str, n_qubits: int, layers: int, run_index: int) -> str:
    return f"{prefix}-n{n_qubits:02d}-L{layers:02d}-r{run_index:03d}"
