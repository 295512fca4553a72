# core/run_io.py
from __future__ import annotations

import json
import logging
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from core.errors import DomainError
from core.records import RunRecord, seed_entropy
from core.run_config import LabConfig
from core.run_journal import RunJournal, journal_path_for_run_dir

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"

TRAINING_LOG_COLS = ["run_id", "step", "loss", "metric"]
FINAL_COLS = ["run_id", "n_qubits", "layers", "seed", "final_loss", "final_metric"]

# RNG stream tags per experiment kind, echoed in the manifest
STREAM_TAGS = {
    "teacher-student-qcnn": ("teacher", "dataset", "student", "batches"),
    "teacher-student-checkerboard": ("teacher", "dataset", "student", "batches"),
    "vqe": ("target", "ansatz"),
    "vqe-layerwise": ("target", "ansatz"),
    "landscape-slice": ("teacher", "dataset", "student", "target", "ansatz", "directions"),
    "whrf-minima": ("whrf",),
    "sq-adversary": ("queries",),
}


def _json_default(o: Any):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Path):
        return o.as_posix()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def dumps(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n"


def write_json(path: Path, payload: Any) -> Path:
    path.write_text(dumps(payload), encoding="utf-8", newline="\n")
    return path


def write_csv(df: pd.DataFrame, path: Path) -> Path:
    df.to_csv(path, index=False, lineterminator="\n")
    return path


def library_versions() -> Dict[str, str]:
    out = {}
    for pkg in ("numpy", "scipy", "pandas"):
        try:
            out[pkg] = version(pkg)
        except PackageNotFoundError:
            out[pkg] = "unknown"
    return out


# ----------------------------
# Frames
# ----------------------------
def training_log_frame(records: Sequence[RunRecord]) -> pd.DataFrame:
    rows = [
        {"run_id": rec.run_id, "step": step, "loss": loss, "metric": metric}
        for rec in sorted(records, key=lambda r: r.run_id)
        for step, loss, metric in rec.log
    ]
    return pd.DataFrame(rows, columns=TRAINING_LOG_COLS)


def smoothed_log_frame(records: Sequence[RunRecord], window: int = 10) -> pd.DataFrame:
    """Trailing mean of the loss over up to `window` logged points (shorter at the start)."""
    if window < 1:
        raise DomainError("smoothing window must be >= 1")
    frames = []
    for rec in sorted(records, key=lambda r: r.run_id):
        df = pd.DataFrame(rec.log, columns=["step", "loss", "metric"])
        df["loss"] = df["loss"].rolling(window, min_periods=1).mean()
        df.insert(0, "run_id", rec.run_id)
        frames.append(df)
    if not frames:
        return pd.DataFrame(columns=TRAINING_LOG_COLS)
    return pd.concat(frames, ignore_index=True)[TRAINING_LOG_COLS]


def final_scatter_frame(records: Sequence[RunRecord]) -> pd.DataFrame:
    rows = [
        {
            "run_id": rec.run_id,
            "n_qubits": rec.n_qubits,
            "layers": rec.layers,
            "seed": rec.seed,
            "final_loss": rec.final_loss,
            "final_metric": rec.final_metric,
        }
        for rec in sorted(records, key=lambda r: r.run_id)
    ]
    return pd.DataFrame(rows, columns=FINAL_COLS)


# ----------------------------
# Writers
# ----------------------------
def run_entry(cfg: LabConfig, run_id: str, run_index: int, wall_time: float, **extra) -> Dict[str, Any]:
    tags = STREAM_TAGS.get(cfg.kind, ())
    return {
        "run_id": run_id,
        "run_index": run_index,
        "wall_time": float(wall_time),
        "seed_entropy": {t: seed_entropy(cfg.base_seed, run_index, t) for t in tags},
        **extra,
    }


def write_manifest(
    run_dir: Path,
    cfg: LabConfig,
    digest: str,
    runs: Iterable[Dict[str, Any]],
    *,
    outputs: Sequence[str] = (),
    extra: Optional[Dict[str, Any]] = None,
) -> Path:
    manifest = {
        "created_at": datetime.now(timezone.utc).replace(microsecond=0).isoformat().replace("+00:00", "Z"),
        "kind": cfg.kind,
        "config": cfg.as_dict(),
        "config_digest": digest,
        "base_seed": cfg.base_seed,
        "runs": sorted(runs, key=lambda r: r["run_id"]),
        "outputs": sorted(outputs),
        "versions": library_versions(),
        "qubit_order": "little-endian",
        **(extra or {}),
    }
    return write_json(run_dir / MANIFEST, manifest)


def write_training_outputs(run_dir: Path, cfg: LabConfig, digest: str, records: Sequence[RunRecord], *, smoothing_window: Optional[int] = None) -> List[str]:
    records = sorted(records, key=lambda r: r.run_id)
    outputs = ["training_log.csv", "final_scatter.csv"]
    write_csv(training_log_frame(records), run_dir / "training_log.csv")
    write_csv(final_scatter_frame(records), run_dir / "final_scatter.csv")
    if smoothing_window:
        write_csv(smoothed_log_frame(records, smoothing_window), run_dir / "training_log_smoothed.csv")
        outputs.append("training_log_smoothed.csv")

    journal = RunJournal(journal_path_for_run_dir(run_dir))
    journal.reset()
    for rec in records:
        journal.log(run_id=rec.run_id, event_type="run_start", data={"n_qubits": rec.n_qubits, "layers": rec.layers})
        for ev in rec.events:
            journal.log(run_id=rec.run_id, event_type=str(ev.get("event_type", "event")), data=dict(ev))
        journal.log(
            run_id=rec.run_id,
            event_type="run_end",
            data={"final_loss": rec.final_loss, "final_metric": rec.final_metric, "wall_time": rec.wall_time},
        )

    runs = [
        run_entry(cfg, rec.run_id, rec.run_index, rec.wall_time, summary=rec.summary(), events=rec.events)
        for rec in records
    ]
    write_manifest(run_dir, cfg, digest, runs, outputs=outputs + ["events.jsonl"])
    return outputs


# ----------------------------
# Readers (best effort)
# ----------------------------
def list_runs(output_root: Path) -> List[Dict[str, Any]]:
    """Every <root>/<kind>/<digest> directory with a manifest, newest first."""
    root = Path(output_root)
    if not root.exists():
        return []

    runs = []
    for kind_dir in root.iterdir():
        if not kind_dir.is_dir():
            continue
        for run_dir in kind_dir.iterdir():
            if not run_dir.is_dir():
                continue
            meta = {}
            meta_path = run_dir / MANIFEST
            if meta_path.exists():
                try:
                    meta = json.loads(meta_path.read_text(encoding="utf-8"))
                except Exception:
                    meta = {}
            runs.append(
                {
                    "kind": kind_dir.name,
                    "digest": run_dir.name,
                    "path": run_dir,
                    "created_at": meta.get("created_at", ""),
                    "meta": meta,
                }
            )
    runs.sort(key=lambda r: (r.get("created_at", ""), r["digest"]), reverse=True)
    return runs


def load_run(run_dir: Path) -> Dict[str, Any]:
    run_dir = Path(run_dir)
    out: Dict[str, Any] = {"meta": {}, "tables": {}, "documents": {}}
    meta_path = run_dir / MANIFEST
    if meta_path.exists():
        try:
            out["meta"] = json.loads(meta_path.read_text(encoding="utf-8"))
        except Exception:
            logger.warning("unreadable manifest %s", meta_path)
            out["meta"] = {}

    if run_dir.exists():
        for p in sorted(run_dir.glob("*.csv")):
            try:
                out["tables"][p.stem] = pd.read_csv(p)
            except Exception:
                logger.warning("unreadable table %s", p)
                out["tables"][p.stem] = pd.DataFrame()
        for p in sorted(run_dir.glob("*.json")):
            if p.name == MANIFEST:
                continue
            try:
                out["documents"][p.stem] = json.loads(p.read_text(encoding="utf-8"))
            except Exception:
                logger.warning("unreadable document %s", p)
                out["documents"][p.stem] = {}
    out["events"] = RunJournal(journal_path_for_run_dir(run_dir)).read()
    return out
