# core/summaries.py
from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional, Tuple

import pandas as pd

from core.run_io import list_runs, load_run

logger = logging.getLogger(__name__)

SUMMARY_COLS = ["n_qubits", "layers", "count", "median_loss", "min_loss", "max_loss", "median_metric", "min_metric", "max_metric"]


def per_size_summary(final: pd.DataFrame) -> pd.DataFrame:
    """
    Final-loss and final-metric statistics per (n_qubits, layers) from a
    final_scatter table.
    """
    if final is None or final.empty or "final_loss" not in final.columns:
        return pd.DataFrame(columns=SUMMARY_COLS)
    df = final.copy()
    for c in ["final_loss", "final_metric", "n_qubits", "layers"]:
        if c in df.columns:
            df[c] = pd.to_numeric(df[c], errors="coerce")
    grouped = df.groupby(["n_qubits", "layers"], sort=True)
    out = grouped.agg(
        count=("final_loss", "size"),
        median_loss=("final_loss", "median"),
        min_loss=("final_loss", "min"),
        max_loss=("final_loss", "max"),
        median_metric=("final_metric", "median"),
        min_metric=("final_metric", "min"),
        max_metric=("final_metric", "max"),
    )
    return out.reset_index()[SUMMARY_COLS]


def load_final_history(output_root: Path, kind: str, max_runs: int = 60) -> pd.DataFrame:
    """
    One row per saved invocation of `kind` (oldest first) with the median
    final loss and metric across its runs.
    """
    rows = []
    for entry in list_runs(Path(output_root)):
        if entry["kind"] != kind:
            continue
        final = load_run(entry["path"])["tables"].get("final_scatter")
        if final is None or final.empty:
            continue
        rows.append(
            {
                "digest": entry["digest"],
                "created_at": entry["created_at"],
                "runs": int(len(final)),
                "median_final_loss": pd.to_numeric(final["final_loss"], errors="coerce").median(),
                "median_final_metric": pd.to_numeric(final["final_metric"], errors="coerce").median(),
            }
        )
    if not rows:
        return pd.DataFrame()

    df = pd.DataFrame(rows).sort_values(["created_at", "digest"], ascending=True)
    if max_runs and len(df) > int(max_runs):
        df = df.tail(int(max_runs)).copy()
    return df.reset_index(drop=True)


def compute_trend_delta(df: pd.DataFrame, col: str) -> Tuple[Optional[float], Optional[float], Optional[float]]:
    """(latest, previous, latest - previous) for a numeric column."""
    if df is None or df.empty or col not in df.columns:
        return (None, None, None)

    s = pd.to_numeric(df[col], errors="coerce").dropna()
    if len(s) == 0:
        return (None, None, None)
    if len(s) == 1:
        return (float(s.iloc[-1]), None, None)

    latest = float(s.iloc[-1])
    prev = float(s.iloc[-2])
    return (latest, prev, latest - prev)
