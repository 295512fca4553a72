"""Small helpers shared across Streamlit UI modules."""

from __future__ import annotations

from typing import Optional

import pandas as pd


def is_empty_df(x) -> bool:
    return (x is None) or (not isinstance(x, pd.DataFrame)) or x.empty


def fmt_float(x, digits: int = 3) -> str:
    try:
        return f"{float(x):.{digits}e}"
    except Exception:
        return "—"


def delta_str(d: Optional[float]) -> Optional[str]:
    if d is None:
        return None
    sign = "+" if d >= 0 else ""
    return f"{sign}{d:.3e}"


def run_label(entry: dict) -> str:
    created = entry.get("created_at") or "?"
    return f"{entry.get('kind', '?')} / {entry.get('digest', '?')}  ({created})"
