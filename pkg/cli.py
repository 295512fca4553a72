# cli.py
"""
MinimaLab command line.

    python cli.py vqe --config c.json --seed 7
    python cli.py whrf-density --m 50 --l 10 --verify
    python cli.py sq-certify --class single-layer-global --n 3

Every subcommand writes into <output_dir>/<subcommand>/<digest[:12]>/ and
prints that directory on stdout. Failures print one JSON object on stderr
and exit with the error's code.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from core.errors import INTERNAL_ERROR, LabError, NumericError
from core.harness import Job, landscape_run_id, run_pool, run_training_sweep
from core.landscape import LandscapeSlice, build_landscape_problem, landscape_slice
from core.paths import init_output_root, run_dir_for
from core.records import derive_rng
from core.run_config import (
    SUBCOMMANDS,
    LabConfig,
    apply_overrides,
    config_digest,
    load_config,
    resolve_config,
    sweep_values,
)
from core.run_io import run_entry, write_csv, write_json, write_manifest, write_training_outputs
from core.selftest import results_frame, run_selftest, summarize
from core.sq_adversary import build_queries, simulate_adversarial_oracle
from core.sq_classes import build_class, certify_sq_dimension
from core.whrf import (
    classify_regime,
    density_mass,
    density_mode,
    density_table,
    energy_histogram,
    log_density_derivative,
    minima_search_table,
    overparam_ratio,
)

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
DENSITY_MASS_TOL = 1e-6

# subcommand flag -> dotted config path
FLAG_PATHS: Dict[str, List[Tuple[str, str]]] = {
    "teacher-student-qcnn": [("n_qubits", "experiment.n_qubits"), ("epochs", "experiment.epochs")],
    "teacher-student-checkerboard": [
        ("n_qubits", "experiment.n_qubits"),
        ("layers", "experiment.student_layers"),
        ("epochs", "experiment.epochs"),
    ],
    "vqe": [
        ("n_qubits", "experiment.n_qubits"),
        ("layers", "experiment.ansatz_rows"),
        ("optimizer", "experiment.optimizer"),
        ("steps", "experiment.steps"),
    ],
    "vqe-layerwise": [("n_qubits", "experiment.n_qubits"), ("steps", "experiment.steps")],
    "landscape-slice": [
        ("n_qubits", "experiment.n_qubits"),
        ("target", "experiment.target"),
        ("center", "experiment.center"),
        ("grid_points", "experiment.grid_points"),
    ],
    "whrf-minima": [
        ("m", "experiment.m"),
        ("l", "experiment.l"),
        ("fields", "experiment.n_fields"),
        ("starts", "experiment.starts_per_field"),
    ],
    "whrf-density": [("m", "experiment.m"), ("l", "experiment.l"), ("verify", "experiment.verify")],
    "sq-certify": [("class_name", "experiment.class_name"), ("n", "experiment.n"), ("layers", "experiment.layers")],
    "sq-adversary": [
        ("class_name", "experiment.class_name"),
        ("n", "experiment.n"),
        ("layers", "experiment.layers"),
        ("tau", "experiment.tau"),
        ("queries", "experiment.n_queries"),
        ("query_source", "experiment.query_source"),
    ],
    "selftest": [],
}
COMMON_PATHS = [("seed", "base_seed"), ("threads", "threads"), ("output_dir", "output_dir"), ("n_runs", "n_runs")]


# ----------------------------
# Parser
# ----------------------------
def _add_specific(name: str, p: argparse.ArgumentParser) -> None:
    dests = {dest for dest, _ in FLAG_PATHS[name]}
    if "n_qubits" in dests:
        p.add_argument("--n-qubits", dest="n_qubits", type=int, nargs="+", help="one size or a sweep")
    if "layers" in dests:
        p.add_argument("--layers", type=int, nargs="+", help="one depth or a sweep")
    if "epochs" in dests:
        p.add_argument("--epochs", type=int)
    if "steps" in dests:
        p.add_argument("--steps", type=int)
    if "optimizer" in dests:
        p.add_argument("--optimizer", choices=["gd", "adam"])
    if "target" in dests:
        p.add_argument("--target", choices=["qcnn", "checkerboard", "vqe"])
    if "center" in dests:
        p.add_argument("--center", choices=["teacher", "random"])
    if "grid_points" in dests:
        p.add_argument("--grid-points", dest="grid_points", type=int)
    if "m" in dests:
        p.add_argument("--m", type=float if name == "whrf-density" else int)
    if "l" in dests:
        p.add_argument("--l", type=int)
    if "fields" in dests:
        p.add_argument("--fields", type=int)
    if "starts" in dests:
        p.add_argument("--starts", type=int)
    if "verify" in dests:
        p.add_argument("--verify", action="store_true", default=None, help="fail unless the density integrates to 1")
    if "class_name" in dests:
        p.add_argument("--class", dest="class_name")
    if "n" in dests:
        p.add_argument("--n", type=int)
    if "tau" in dests:
        p.add_argument("--tau", type=float)
    if "queries" in dests:
        p.add_argument("--queries", type=int)
    if "query_source" in dests:
        p.add_argument("--query-source", dest="query_source", choices=["concepts", "random-paulis", "random-sums"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="minimalab", description="Trainability experiments for variational circuits.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="PATH=VALUE")
        p.add_argument("--seed", type=int)
        p.add_argument("--threads", type=int)
        p.add_argument("--output-dir", dest="output_dir")
        p.add_argument("--n-runs", dest="n_runs", type=int)
        p.add_argument("--verbose", action="store_true")
        p.add_argument("--quiet", action="store_true", help="no progress bars")
        _add_specific(name, p)
    return parser


def _flag_value(value):
    if isinstance(value, list) and len(value) == 1:
        return value[0]
    return value


def overrides_from_args(args: argparse.Namespace) -> List[str]:
    out: List[str] = []
    for dest, path in COMMON_PATHS + FLAG_PATHS[args.subcommand]:
        value = getattr(args, dest, None)
        if value is not None:
            out.append(f"{path}={json.dumps(_flag_value(value))}")
    return out + list(args.overrides)


def config_from_args(args: argparse.Namespace) -> LabConfig:
    raw = load_config(args.config) if args.config else {"experiment": {"kind": args.subcommand}}
    merged = apply_overrides(raw, overrides_from_args(args), args.subcommand)
    return resolve_config(merged, args.subcommand)


# ----------------------------
# Handlers
# ----------------------------
def _run_training(cfg: LabConfig, digest: str, run_dir: Path, quiet: bool) -> None:
    records = run_training_sweep(cfg, digest, quiet=quiet)
    window = getattr(cfg.experiment, "smoothing_window", None) if cfg.kind == "vqe-layerwise" else None
    write_training_outputs(run_dir, cfg, digest, records, smoothing_window=window)


def _run_landscape(cfg: LabConfig, digest: str, run_dir: Path, quiet: bool) -> None:
    exp = cfg.experiment

    def job(n: int, r: int) -> Callable[[], Tuple[LandscapeSlice, float]]:
        def run():
            started = time.perf_counter()
            problem = build_landscape_problem(
                exp.target,
                n,
                layers=exp.layers,
                target_rows=exp.target_rows,
                batch_size=exp.batch_size,
                center=exp.center,
                seed=cfg.base_seed,
                run_index=r,
            )
            sl = landscape_slice(
                problem.layout,
                problem.params0,
                derive_rng(cfg.base_seed, r, "directions"),
                exp.grid_half_width,
                exp.grid_points,
                problem.batch,
            )
            return sl, time.perf_counter() - started

        return run

    layers = 0 if exp.target == "qcnn" else exp.layers
    jobs = [
        Job(landscape_run_id(exp.target, n, layers, r), job(n, r))
        for n in sweep_values(exp.n_qubits)
        for r in range(cfg.n_runs)
    ]
    runs, outputs = [], []
    for idx, (run_id, (sl, wall)) in enumerate(run_pool(jobs, cfg.threads, desc=cfg.kind, quiet=quiet)):
        name = f"landscape_{run_id}.csv"
        write_csv(sl.table, run_dir / name)
        outputs.append(name)
        run_index = int(run_id.rsplit("-r", 1)[1])
        runs.append(run_entry(cfg, run_id, run_index, wall, center_loss=sl.center_loss, skipped_slots=sl.skipped_slots))
    write_manifest(run_dir, cfg, digest, runs, outputs=outputs)


def _run_whrf_minima(cfg: LabConfig, digest: str, run_dir: Path, quiet: bool) -> None:
    exp = cfg.experiment
    started = time.perf_counter()
    table = minima_search_table(
        exp.l,
        exp.m,
        exp.n_fields,
        exp.starts_per_field,
        derive_rng(cfg.base_seed, 0, "whrf"),
        lr=exp.lr,
        max_iters=exp.max_iters,
        tol=exp.tol,
    )
    converged = table.loc[table["converged"], "energy"].tolist()
    write_csv(table, run_dir / "minima.csv")
    write_csv(energy_histogram(converged, bins=exp.bins), run_dir / "histogram.csv")
    gamma = overparam_ratio(exp.l, exp.m)
    logger.info("whrf minima: %d/%d searches converged (gamma = %.3f)", len(converged), len(table), gamma)
    write_manifest(
        run_dir,
        cfg,
        digest,
        [run_entry(cfg, "whrf", 0, time.perf_counter() - started)],
        outputs=["minima.csv", "histogram.csv"],
        extra={
            "gamma": gamma,
            "regime": classify_regime(gamma),
            "searches": int(len(table)),
            "converged": len(converged),
        },
    )


def _run_whrf_density(cfg: LabConfig, digest: str, run_dir: Path, quiet: bool) -> None:
    exp = cfg.experiment
    started = time.perf_counter()
    table = density_table(exp.m, exp.l, exp.points)
    mode = density_mode(exp.m, exp.l)
    mass = density_mass(exp.m, exp.l)
    residual = log_density_derivative(mode, exp.m, exp.l)
    write_csv(table, run_dir / "density.csv")
    write_manifest(
        run_dir,
        cfg,
        digest,
        [run_entry(cfg, "density", 0, time.perf_counter() - started)],
        outputs=["density.csv"],
        extra={"mode": mode, "mass": mass, "stationarity_residual": residual},
    )
    if exp.verify and abs(mass - 1.0) > DENSITY_MASS_TOL:
        raise NumericError(f"density mass {mass:.12f} differs from 1 by more than {DENSITY_MASS_TOL}")


def _run_sq_certify(cfg: LabConfig, digest: str, run_dir: Path, quiet: bool) -> None:
    exp = cfg.experiment
    started = time.perf_counter()
    cls = build_class(exp.class_name, exp.n, exp.layers)
    cert = certify_sq_dimension(cls)
    if not cert.ok:
        logger.warning("class %s failed certification at pair %s", exp.class_name, cert.violating_pair)
    write_json(run_dir / "certificate.json", cert.as_dict(exp.taus, exp.class_name))
    write_manifest(
        run_dir,
        cfg,
        digest,
        [run_entry(cfg, "certificate", 0, time.perf_counter() - started, checked_pairs=cert.checked_pairs)],
        outputs=["certificate.json"],
    )


def _run_sq_adversary(cfg: LabConfig, digest: str, run_dir: Path, quiet: bool) -> None:
    exp = cfg.experiment
    started = time.perf_counter()
    cls = build_class(exp.class_name, exp.n, exp.layers)
    queries = build_queries(cls, exp.query_source, exp.n_queries, derive_rng(cfg.base_seed, 0, "queries"), exp.sum_terms)
    result = simulate_adversarial_oracle(cls, queries, exp.tau)
    write_json(run_dir / "transcript.json", result.as_dict(exp.class_name))
    write_manifest(
        run_dir,
        cfg,
        digest,
        [run_entry(cfg, "adversary", 0, time.perf_counter() - started)],
        outputs=["transcript.json"],
        extra={"within_bound": result.within_bound, "alive": len(result.state.alive), "d": cls.size},
    )


def _run_selftest(cfg: LabConfig, digest: str, run_dir: Path, quiet: bool) -> None:
    exp = cfg.experiment
    started = time.perf_counter()
    results = run_selftest(exp.n_qubits, exp.layers, exp.fd_step, exp.tolerance, seed=cfg.base_seed)
    write_json(run_dir / "selftest.json", results_frame(results).to_dict(orient="records"))
    write_manifest(run_dir, cfg, digest, [run_entry(cfg, "selftest", 0, time.perf_counter() - started)], outputs=["selftest.json"])
    ok, failed = summarize(results)
    if not ok:
        raise NumericError(f"{failed} selftest check(s) failed")


HANDLERS = {
    "teacher-student-qcnn": _run_training,
    "teacher-student-checkerboard": _run_training,
    "vqe": _run_training,
    "vqe-layerwise": _run_training,
    "landscape-slice": _run_landscape,
    "whrf-minima": _run_whrf_minima,
    "whrf-density": _run_whrf_density,
    "sq-certify": _run_sq_certify,
    "sq-adversary": _run_sq_adversary,
    "selftest": _run_selftest,
}


def run(subcommand: str, config_path: Optional[str] = None, overrides: Sequence[str] = (), *, quiet: bool = True) -> Path:
    """Programmatic entry point; returns the run directory."""
    raw = load_config(config_path) if config_path else {"experiment": {"kind": subcommand}}
    cfg = resolve_config(apply_overrides(raw, list(overrides), subcommand), subcommand)
    return execute(cfg, quiet=quiet)


def execute(cfg: LabConfig, *, quiet: bool = True) -> Path:
    digest = config_digest(cfg)
    run_dir = run_dir_for(init_output_root(cfg.output_dir), cfg.kind, digest)
    logger.info("%s -> %s (digest %s)", cfg.kind, run_dir.as_posix(), digest[:12])
    HANDLERS[cfg.kind](cfg, digest, run_dir, quiet)
    return run_dir


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format=LOG_FORMAT, stream=sys.stderr)
    try:
        run_dir = execute(config_from_args(args), quiet=args.quiet)
    except LabError as e:
        print(json.dumps(e.as_dict()), file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.exception("internal error")
        print(json.dumps({**INTERNAL_ERROR, "message": str(e)}), file=sys.stderr)
        return INTERNAL_ERROR["exit_code"]
    print(run_dir.as_posix())
    return 0


if __name__ == "__main__":
    sys.exit(main())
