# ui/sidebar.py
from __future__ import annotations

from pathlib import Path

import streamlit as st

from core.run_config import SUBCOMMANDS, default_output_dir


def render_sidebar_context(base_dir: Path, *, key_prefix: str = "sb") -> dict:
    """
    Renders sidebar controls and returns:
      output_root, kind, max_history
    """
    with st.sidebar:
        st.header("Output")
        default_root = Path(default_output_dir())
        if not default_root.is_absolute():
            default_root = base_dir / default_root
        root_text = st.text_input(
            "Output root",
            value=default_root.as_posix(),
            key=f"{key_prefix}_output_root",
            help="Directory holding <kind>/<digest>/ run folders (MINIMALAB_OUTPUT_DIR sets the default).",
        )

        st.divider()
        st.header("Filter")
        kind = st.selectbox("Experiment kind", ["(all)"] + list(SUBCOMMANDS), index=0, key=f"{key_prefix}_kind")
        max_history = st.slider("Trend history (invocations)", 2, 120, 30, 1, key=f"{key_prefix}_max_history")

        output_root = Path(root_text.strip() or default_root)
        if output_root.exists() and not output_root.is_dir():
            st.error(f"`{output_root.as_posix()}` is a FILE, not a folder.")
            st.stop()

    return {
        "output_root": output_root,
        "kind": None if kind == "(all)" else kind,
        "max_history": int(max_history),
    }
