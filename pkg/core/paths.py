# core/paths.py
from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

from core.errors import ConfigError
from core.run_config import default_output_dir

logger = logging.getLogger(__name__)


def init_output_root(output_dir: Optional[str] = None) -> Path:
    """Create (if needed) and return the output root."""
    root = Path(output_dir or default_output_dir())
    if root.exists() and not root.is_dir():
        raise ConfigError(
            f"output path {root.as_posix()} exists but is a FILE, not a folder; "
            "delete or rename it, or pass --output-dir"
        )
    root.mkdir(parents=True, exist_ok=True)
    logger.debug("output root %s", root.as_posix())
    return root


def run_dir_for(root: Path, kind: str, digest: str) -> Path:
    """<root>/<kind>/<digest[:12]>"""
    run_dir = Path(root) / kind / digest[:12]
    if run_dir.exists() and not run_dir.is_dir():
        raise ConfigError(f"run path {run_dir.as_posix()} exists but is a FILE, not a folder")
    run_dir.mkdir(parents=True, exist_ok=True)
    return run_dir
