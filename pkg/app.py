# app.py
from __future__ import annotations

import os
from pathlib import Path

import streamlit as st

# ============================================================
# BRAND (single source of truth)
# ============================================================
BRAND_NAME = os.getenv("APP_BRAND_NAME", "MinimaLab")
TAGLINE = os.getenv(
    "APP_TAGLINE",
    "Browse trainability runs: training logs, landscapes, minima histograms and SQ certificates.",
)

# MUST be first Streamlit call
st.set_page_config(page_title=BRAND_NAME, layout="wide")

from ui.runs_ui import render_run_browser  # noqa: E402
from ui.sidebar import render_sidebar_context  # noqa: E402

st.title(BRAND_NAME)
st.caption(TAGLINE)

ctx = render_sidebar_context(Path(__file__).resolve().parent)
render_run_browser(ctx["output_root"], kind_filter=ctx["kind"], max_history=ctx["max_history"])
