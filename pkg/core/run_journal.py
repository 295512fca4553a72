# core/run_journal.py
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

logger = logging.getLogger(__name__)


def _utc_now_iso() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat().replace("+00:00", "Z")


def journal_path_for_run_dir(run_dir: Path) -> Path:
    return Path(run_dir) / "events.jsonl"


@dataclass
class RunEvent:
    ts: str
    run_id: str
    event_type: str  # "run_start" | "run_end" | "growth" | "early_stop" | "schedule_exhausted" | ...
    summary: str
    data: Optional[Dict[str, Any]] = None

    def as_dict(self) -> Dict[str, Any]:
        return {
            "ts": self.ts,
            "run_id": self.run_id,
            "event_type": self.event_type,
            "summary": self.summary,
            "data": self.data or {},
        }


class RunJournal:
    """
    Append-only JSONL journal of run events.
    Each line is a single event dict.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def append(self, event: Dict[str, Any]) -> None:
        """
        Fail-safe append.
        Never raises to callers.
        """
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            line = json.dumps(event, ensure_ascii=False, sort_keys=True, default=float)
            with self.path.open("a", encoding="utf-8") as f:
                f.write(line + "\n")
        except Exception:
            logger.warning("could not append to journal %s", self.path, exc_info=True)

    def log(
        self,
        *,
        run_id: str,
        event_type: str,
        summary: str = "",
        data: Optional[Dict[str, Any]] = None,
        ts: Optional[str] = None,
    ) -> None:
        ev = RunEvent(
            ts=ts or _utc_now_iso(),
            run_id=str(run_id),
            event_type=str(event_type),
            summary=str(summary or event_type),
            data=data or {},
        )
        self.append(ev.as_dict())

    def reset(self) -> None:
        """Start a fresh journal for a new invocation in the same run directory."""
        try:
            self.path.unlink(missing_ok=True)
        except Exception:
            return

    def read(self) -> List[Dict[str, Any]]:
        """Best effort: unreadable lines are skipped, a missing file reads as empty."""
        if not self.path.exists():
            return []
        out = []
        try:
            lines = self.path.read_text(encoding="utf-8").splitlines()
        except Exception:
            logger.warning("could not read journal %s", self.path, exc_info=True)
            return []
        for line in lines:
            line = line.strip()
            if not line:
                continue
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError:
                logger.debug("skipping malformed journal line in %s", self.path)
                continue
        return out
