# core/run_config.py
"""
Experiment configuration.

A config is one JSON document:

    {"experiment": {"kind": <subcommand>, ...block fields...},
     "base_seed": 0, "n_runs": 1, "output_dir": "runs", "threads": 1}

Every block field has a default, so `{"experiment": {"kind": "vqe"}}` is a
complete config. Overrides address leaves by dotted path
("experiment.n_qubits=[4, 8]", "base_seed=7").
"""
from __future__ import annotations

import copy
import hashlib
import json
import logging
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from core.errors import ConfigError

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "MINIMALAB_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "runs"

IntOrList = Union[int, List[int]]

# fields that may hold a list and are expanded into a sweep
SWEEP_FIELDS = ("n_qubits", "student_layers", "ansatz_rows")


# ----------------------------
# Blocks
# ----------------------------
@dataclass
class QcnnBlock:
    kind: str = "teacher-student-qcnn"
    n_qubits: IntOrList = 4
    dataset_size: int = 512
    batch_size: int = 128
    epochs: int = 5000
    lr: Optional[float] = None
    log_every: int = 10
    student_init: str = "random"


@dataclass
class CheckerboardBlock:
    kind: str = "teacher-student-checkerboard"
    n_qubits: IntOrList = 4
    student_layers: IntOrList = 4
    teacher_layers: int = 4
    dataset_size: int = 512
    batch_size: int = 128
    epochs: int = 5000
    lr: Optional[float] = None
    early_stop_loss: float = 0.001
    log_every: int = 10
    student_init: str = "random"


@dataclass
class VqeBlock:
    kind: str = "vqe"
    n_qubits: IntOrList = 4
    target_rows: int = 4
    ansatz_rows: IntOrList = 4
    optimizer: str = "gd"
    steps: int = 30000
    lr: Optional[float] = None
    log_every: int = 100


@dataclass
class VqeLayerwiseBlock:
    kind: str = "vqe-layerwise"
    n_qubits: IntOrList = 7
    target_rows: int = 4
    steps: int = 100000
    lr: Optional[float] = None
    steps_per_layer: int = 5000
    lr_decay: float = 0.95
    max_layers: int = 20
    log_every: int = 100
    smoothing_window: int = 10


@dataclass
class LandscapeBlock:
    kind: str = "landscape-slice"
    target: str = "qcnn"
    n_qubits: IntOrList = 4
    layers: int = 4
    target_rows: int = 4
    batch_size: int = 128
    center: str = "teacher"
    grid_half_width: float = 1.0
    grid_points: int = 51


@dataclass
class WhrfMinimaBlock:
    kind: str = "whrf-minima"
    l: int = 4
    m: int = 2
    n_fields: int = 20
    starts_per_field: int = 50
    lr: float = 0.1
    max_iters: int = 100000
    tol: float = 1e-6
    bins: int = 40


@dataclass
class WhrfDensityBlock:
    kind: str = "whrf-density"
    m: float = 50.0
    l: int = 10
    points: int = 199
    verify: bool = False


@dataclass
class SqCertifyBlock:
    kind: str = "sq-certify"
    class_name: str = "single-layer-global"
    n: int = 3
    layers: int = 1
    taus: List[float] = field(default_factory=lambda: [1.0, 0.5, 0.25, 0.1])


@dataclass
class SqAdversaryBlock:
    kind: str = "sq-adversary"
    class_name: str = "single-layer-global"
    n: int = 3
    layers: int = 1
    tau: float = 0.5
    query_source: str = "random-paulis"
    n_queries: int = 20
    sum_terms: int = 4


@dataclass
class SelftestBlock:
    kind: str = "selftest"
    n_qubits: int = 3
    layers: int = 2
    fd_step: float = 1e-5
    tolerance: float = 1e-5


Block = Union[
    QcnnBlock,
    CheckerboardBlock,
    VqeBlock,
    VqeLayerwiseBlock,
    LandscapeBlock,
    WhrfMinimaBlock,
    WhrfDensityBlock,
    SqCertifyBlock,
    SqAdversaryBlock,
    SelftestBlock,
]

BLOCKS = {
    cls().kind: cls
    for cls in (
        QcnnBlock,
        CheckerboardBlock,
        VqeBlock,
        VqeLayerwiseBlock,
        LandscapeBlock,
        WhrfMinimaBlock,
        WhrfDensityBlock,
        SqCertifyBlock,
        SqAdversaryBlock,
        SelftestBlock,
    )
}
SUBCOMMANDS = tuple(BLOCKS)


@dataclass
class LabConfig:
    experiment: Block
    base_seed: int = 0
    n_runs: int = 1
    output_dir: str = DEFAULT_OUTPUT_DIR
    threads: int = 1

    @property
    def kind(self) -> str:
        return self.experiment.kind

    def as_dict(self) -> Dict[str, Any]:
        return {
            "experiment": asdict(self.experiment),
            "base_seed": self.base_seed,
            "n_runs": self.n_runs,
            "output_dir": self.output_dir,
            "threads": self.threads,
        }


@dataclass(frozen=True)
class ConfigReport:
    ok: bool
    level: str  # "ok" | "warn" | "error"
    messages: List[str]


# ----------------------------
# Loading and overrides
# ----------------------------
def default_output_dir() -> str:
    return os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR


def default_config(kind: str) -> Dict[str, Any]:
    if kind not in BLOCKS:
        raise ConfigError(f"unknown experiment kind {kind!r}; choose from {sorted(BLOCKS)}")
    return LabConfig(BLOCKS[kind](), output_dir=default_output_dir()).as_dict()


def load_config(path: Union[str, Path]) -> Dict[str, Any]:
    p = Path(path)
    try:
        raw = json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {p.as_posix()}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {p.as_posix()} is not valid JSON: {e}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    return raw


def _decode_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(raw: Dict[str, Any], overrides: Sequence[str], kind: Optional[str] = None) -> Dict[str, Any]:
    """
    Apply "dotted.path=value" overrides onto a config dict filled with defaults.
    Paths must already exist; the value is JSON-decoded, falling back to a string.
    """
    kind = kind or (raw.get("experiment") or {}).get("kind")
    out = merge_defaults(raw, kind)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form path=value")
        path, text = item.split("=", 1)
        keys = [k for k in path.strip().split(".") if k]
        if not keys:
            raise ConfigError(f"override {item!r} has an empty path")
        node = out
        for k in keys[:-1]:
            if not isinstance(node, dict) or k not in node:
                raise ConfigError(f"override path {path!r} does not exist")
            node = node[k]
        if not isinstance(node, dict) or keys[-1] not in node:
            raise ConfigError(f"override path {path!r} does not exist")
        if keys == ["experiment", "kind"]:
            raise ConfigError("the experiment kind is fixed by the subcommand")
        node[keys[-1]] = _decode_value(text.strip())
    return out


def merge_defaults(raw: Dict[str, Any], kind: Optional[str]) -> Dict[str, Any]:
    exp = dict(raw.get("experiment") or {})
    kind = kind or exp.get("kind")
    if not kind:
        raise ConfigError("config has no experiment kind")
    if exp.get("kind", kind) != kind:
        raise ConfigError(f"config describes {exp.get('kind')!r} but {kind!r} was requested")
    out = default_config(kind)
    for key, value in raw.items():
        if key == "experiment":
            continue
        if key not in out:
            raise ConfigError(f"unknown top-level config key {key!r}")
        out[key] = copy.deepcopy(value)
    for key, value in exp.items():
        if key not in out["experiment"]:
            raise ConfigError(f"unknown field {key!r} for experiment {kind!r}")
        out["experiment"][key] = copy.deepcopy(value)
    out["experiment"]["kind"] = kind
    return out


# ----------------------------
# Typed resolution
# ----------------------------
def _type_ok(name: str, value: Any, default: Any) -> bool:
    if name in SWEEP_FIELDS and isinstance(value, list):
        return bool(value) and all(isinstance(v, int) and not isinstance(v, bool) for v in value)
    if isinstance(default, bool):
        return isinstance(value, bool)
    if isinstance(default, int):
        return isinstance(value, int) and not isinstance(value, bool)
    if isinstance(default, float):
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if isinstance(default, str):
        return isinstance(value, str)
    if isinstance(default, list):
        return isinstance(value, list) and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
    if default is None:
        # optional learning rates
        return value is None or (isinstance(value, (int, float)) and not isinstance(value, bool))
    return True


def resolve_config(raw: Dict[str, Any], kind: Optional[str] = None) -> LabConfig:
    merged = merge_defaults(raw, kind)
    exp = merged["experiment"]
    block_cls = BLOCKS[exp["kind"]]
    defaults = block_cls()
    for f in fields(block_cls):
        value = exp[f.name]
        if not _type_ok(f.name, value, getattr(defaults, f.name)):
            raise ConfigError(f"experiment.{f.name} has the wrong type: {value!r}")
        if isinstance(getattr(defaults, f.name), float) and isinstance(value, int):
            exp[f.name] = float(value)
    for key in ("base_seed", "n_runs", "threads"):
        if not isinstance(merged[key], int) or isinstance(merged[key], bool):
            raise ConfigError(f"{key} must be an integer")
    if not isinstance(merged["output_dir"], str) or not merged["output_dir"]:
        raise ConfigError("output_dir must be a nonempty string")
    cfg = LabConfig(
        experiment=block_cls(**exp),
        base_seed=merged["base_seed"],
        n_runs=merged["n_runs"],
        output_dir=merged["output_dir"],
        threads=merged["threads"],
    )
    report = validate_config(cfg)
    if not report.ok:
        raise ConfigError("; ".join(report.messages))
    return cfg


def validate_config(cfg: LabConfig) -> ConfigReport:
    """Range checks that do not need the numerics; experiments re-check their own inputs."""
    errors: List[str] = []
    warnings: List[str] = []
    exp = cfg.experiment

    if cfg.n_runs < 1:
        errors.append("n_runs must be >= 1")
    if cfg.threads < 1:
        errors.append("threads must be >= 1")
    if cfg.base_seed < 0:
        errors.append("base_seed must be >= 0")

    for name in SWEEP_FIELDS:
        if hasattr(exp, name):
            values = sweep_values(getattr(exp, name))
            if len(set(values)) != len(values):
                errors.append(f"experiment.{name} lists a value twice")
            if name == "n_qubits" and any(v < 2 for v in values):
                errors.append("experiment.n_qubits must be >= 2")
            if name != "n_qubits" and any(v < 1 for v in values):
                errors.append(f"experiment.{name} must be >= 1")

    if hasattr(exp, "batch_size") and hasattr(exp, "dataset_size") and exp.batch_size > exp.dataset_size:
        errors.append("batch_size must not exceed dataset_size")
    if hasattr(exp, "log_every") and exp.log_every < 1:
        errors.append("log_every must be >= 1")
    if isinstance(exp, VqeBlock) and exp.optimizer not in ("gd", "adam"):
        errors.append(f"unknown optimizer {exp.optimizer!r}")
    if isinstance(exp, LandscapeBlock):
        if exp.target not in ("qcnn", "checkerboard", "vqe"):
            errors.append(f"unknown landscape target {exp.target!r}")
        if exp.grid_points % 2 == 0 or exp.grid_points < 1:
            errors.append("grid_points must be a positive odd number")
        if exp.center not in ("teacher", "random"):
            errors.append(f"unknown landscape center {exp.center!r}")
    if isinstance(exp, (SqCertifyBlock, SqAdversaryBlock)) and exp.n < 1:
        errors.append("n must be >= 1")
    if isinstance(exp, (SqCertifyBlock, SqAdversaryBlock)) and exp.layers < 1:
        errors.append("layers must be >= 1")
    if isinstance(exp, SqAdversaryBlock) and not 0.0 < exp.tau <= 1.0:
        errors.append("tau must lie in (0, 1]")
    if isinstance(exp, SqCertifyBlock) and any(not 0.0 < t <= 1.0 for t in exp.taus):
        errors.append("every tau must lie in (0, 1]")

    if isinstance(exp, WhrfMinimaBlock) and exp.l / (2.0 * exp.m) < 1.0 and exp.starts_per_field < 10:
        warnings.append("few starts per field: the underparameterized histogram will be sparse")
    if isinstance(exp, (QcnnBlock, CheckerboardBlock, VqeBlock)) and cfg.threads > cfg.n_runs * len(sweep_values(exp.n_qubits)):
        warnings.append("more threads than runs; extra workers stay idle")

    if errors:
        return ConfigReport(ok=False, level="error", messages=errors + warnings)
    if warnings:
        return ConfigReport(ok=True, level="warn", messages=warnings)
    return ConfigReport(ok=True, level="ok", messages=["config looks good"])


def sweep_values(value: IntOrList) -> List[int]:
    return list(value) if isinstance(value, list) else [int(value)]


# ----------------------------
# Digest
# ----------------------------
def canonical_json(payload: Dict[str, Any]) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def config_digest(cfg: LabConfig) -> str:
    """SHA-256 of the canonical config; output_dir and threads never change results and are left out."""
    payload = cfg.as_dict()
    payload.pop("output_dir")
    payload.pop("threads")
    return hashlib.sha256(canonical_json(payload).encode("ascii")).hexdigest()
