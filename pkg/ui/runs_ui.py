# ui/runs_ui.py
from __future__ import annotations

from pathlib import Path
from typing import Optional

import pandas as pd
import streamlit as st

from core.run_io import list_runs, load_run
from core.summaries import compute_trend_delta, load_final_history, per_size_summary
from ui.app_helpers import delta_str, fmt_float, is_empty_df, run_label


def _render_trends(output_root: Path, kind: str, max_history: int) -> None:
    history = load_final_history(output_root, kind, max_runs=max_history)
    if is_empty_df(history) or len(history) < 2:
        st.caption("Save at least two invocations of this kind to see a trend.")
        return
    latest_loss, _, delta_loss = compute_trend_delta(history, "median_final_loss")
    latest_metric, _, delta_metric = compute_trend_delta(history, "median_final_metric")
    c1, c2 = st.columns(2)
    c1.metric("Median final loss (latest)", fmt_float(latest_loss), delta_str(delta_loss), delta_color="inverse")
    c2.metric("Median final metric (latest)", fmt_float(latest_metric), delta_str(delta_metric))
    with st.expander("History", expanded=False):
        st.dataframe(history, use_container_width=True, hide_index=True)


def render_run_browser(output_root: Path, *, kind_filter: Optional[str] = None, max_history: int = 30) -> None:
    runs = list_runs(output_root)
    if kind_filter:
        runs = [r for r in runs if r["kind"] == kind_filter]

    if not runs:
        st.info(f"No runs found under `{Path(output_root).as_posix()}`. Run `python cli.py <subcommand>` first.")
        return

    labels = [run_label(r) for r in runs]
    idx = st.selectbox("Run", list(range(len(runs))), format_func=lambda i: labels[i], key="runs_select")
    entry = runs[idx]
    data = load_run(entry["path"])
    meta = data.get("meta", {}) or {}

    st.subheader(f"{entry['kind']} · {entry['digest']}")
    st.caption(f"Folder: `{Path(entry['path']).as_posix()}`")

    tabs = st.tabs(["Tables", "Summary", "Documents", "Manifest", "Events"])

    with tabs[0]:
        tables = data.get("tables", {})
        if not tables:
            st.info("This run wrote no CSV tables.")
        for name, df in tables.items():
            st.markdown(f"**{name}.csv** ({len(df)} rows)")
            st.dataframe(df, use_container_width=True, hide_index=True)

    with tabs[1]:
        final = data.get("tables", {}).get("final_scatter")
        if is_empty_df(final):
            st.info("Per-size summaries apply to training runs only.")
        else:
            st.dataframe(per_size_summary(final), use_container_width=True, hide_index=True)
            _render_trends(output_root, entry["kind"], max_history)

    with tabs[2]:
        docs = data.get("documents", {})
        if not docs:
            st.info("No certificate, transcript or selftest documents in this run.")
        for name, doc in docs.items():
            st.markdown(f"**{name}.json**")
            if name == "selftest" and isinstance(doc, list):
                st.dataframe(pd.DataFrame(doc), use_container_width=True, hide_index=True)
            elif name == "transcript" and isinstance(doc, dict):
                st.json({k: v for k, v in doc.items() if k != "queries"})
                st.dataframe(pd.DataFrame(doc.get("queries", [])), use_container_width=True, hide_index=True)
            else:
                st.json(doc)

    with tabs[3]:
        st.json(meta)

    with tabs[4]:
        events = data.get("events", [])
        if not events:
            st.info("No events recorded.")
        else:
            st.dataframe(pd.json_normalize(events), use_container_width=True, hide_index=True)
