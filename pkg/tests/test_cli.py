# tests/test_cli.py
from __future__ import annotations

import json
from pathlib import Path

import pandas as pd
import pytest

import cli
from core.run_config import SUBCOMMANDS


def _main(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out.strip(), err.strip()


def _error(err: str) -> dict:
    return json.loads(err.splitlines()[-1])


def test_parser_knows_every_subcommand():
    parser = cli.build_parser()
    for name in SUBCOMMANDS:
        args = parser.parse_args([name])
        assert args.subcommand == name
    assert set(cli.HANDLERS) == set(SUBCOMMANDS)


def test_flags_become_overrides():
    args = cli.build_parser().parse_args(
        ["vqe", "--n-qubits", "3", "4", "--layers", "2", "--seed", "5", "--set", "experiment.lr=0.01"]
    )
    assert cli.overrides_from_args(args) == [
        "base_seed=5",
        "experiment.n_qubits=[3, 4]",
        "experiment.ansatz_rows=2",
        "experiment.lr=0.01",
    ]
    cfg = cli.config_from_args(args)
    assert cfg.experiment.n_qubits == [3, 4]
    assert cfg.experiment.ansatz_rows == 2
    assert cfg.base_seed == 5


def test_sq_certify_writes_a_certificate(tmp_path, capsys):
    code, out, _ = _main(
        capsys, "sq-certify", "--class", "single-layer-global", "--n", "2", "--output-dir", str(tmp_path), "--quiet"
    )
    assert code == 0
    run_dir = Path(out)
    assert run_dir.parent == tmp_path / "sq-certify"
    cert = json.loads((run_dir / "certificate.json").read_text(encoding="utf-8"))
    assert cert["ok"] is True
    assert cert["d"] == 9
    manifest = json.loads((run_dir / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["outputs"] == ["certificate.json"]


def test_sq_certify_accepts_proposition_names(tmp_path, capsys):
    code, out, _ = _main(capsys, "sq-certify", "--class", "prop-c2", "--n", "3", "--output-dir", str(tmp_path), "--quiet")
    assert code == 0
    cert = json.loads((Path(out) / "certificate.json").read_text(encoding="utf-8"))
    assert cert["ok"] is True
    assert cert["d"] == 27
    assert cert["class"] == "prop-c2"


def test_sq_certify_layered_chain(tmp_path, capsys):
    code, out, _ = _main(
        capsys, "sq-certify", "--class", "chain", "--n", "6", "--layers", "2", "--output-dir", str(tmp_path), "--quiet"
    )
    assert code == 0
    cert = json.loads((Path(out) / "certificate.json").read_text(encoding="utf-8"))
    assert cert["d"] == 255
    manifest = json.loads((Path(out) / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["config"]["experiment"]["layers"] == 2


def test_same_config_reuses_the_run_dir(tmp_path, capsys):
    argv = ["sq-certify", "--class", "z-words", "--n", "3", "--output-dir", str(tmp_path), "--quiet"]
    _, first, _ = _main(capsys, *argv)
    _, second, _ = _main(capsys, *argv, "--threads", "4")
    assert first == second


def test_whrf_density_verify(tmp_path, capsys):
    code, out, _ = _main(
        capsys, "whrf-density", "--m", "50", "--l", "10", "--verify", "--output-dir", str(tmp_path), "--quiet"
    )
    assert code == 0
    table = pd.read_csv(Path(out) / "density.csv")
    assert len(table) == 199
    manifest = json.loads((Path(out) / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["mass"] == pytest.approx(1.0, abs=1e-6)


def test_whrf_density_outside_regime(tmp_path, capsys):
    code, out, err = _main(capsys, "whrf-density", "--m", "4", "--l", "10", "--output-dir", str(tmp_path), "--quiet")
    assert code == 4
    assert out == ""
    assert _error(err)["error"] == "unsupported_regime"


def test_whrf_minima_small(tmp_path, capsys):
    code, out, _ = _main(
        capsys,
        "whrf-minima",
        "--l", "2",
        "--m", "1",
        "--fields", "2",
        "--starts", "3",
        "--set", "experiment.max_iters=5000",
        "--output-dir", str(tmp_path),
        "--quiet",
    )
    assert code == 0
    minima = pd.read_csv(Path(out) / "minima.csv")
    assert len(minima) == 6
    assert (Path(out) / "histogram.csv").is_file()


def test_sq_adversary_transcript(tmp_path, capsys):
    code, out, _ = _main(
        capsys,
        "sq-adversary",
        "--class", "single-layer-global",
        "--n", "2",
        "--tau", "0.5",
        "--queries", "5",
        "--output-dir", str(tmp_path),
        "--quiet",
    )
    assert code == 0
    doc = json.loads((Path(out) / "transcript.json").read_text(encoding="utf-8"))
    assert doc["tau"] == 0.5
    assert len(doc["queries"]) == 5


def test_small_vqe_run(tmp_path, capsys):
    code, out, _ = _main(
        capsys,
        "vqe",
        "--n-qubits", "2",
        "--layers", "1",
        "--steps", "20",
        "--set", "experiment.log_every=5",
        "--set", "experiment.target_rows=1",
        "--output-dir", str(tmp_path),
        "--quiet",
    )
    assert code == 0
    log = pd.read_csv(Path(out) / "training_log.csv")
    assert sorted(log["step"].unique().tolist()) == [0, 5, 10, 15, 20]
    events = (Path(out) / "events.jsonl").read_text(encoding="utf-8").splitlines()
    assert json.loads(events[0])["event_type"] == "run_start"


def test_bad_override_is_a_config_error(tmp_path, capsys):
    code, _, err = _main(capsys, "vqe", "--set", "experiment.nope=1", "--output-dir", str(tmp_path))
    assert code == 3
    assert _error(err)["error"] == "invalid_config"


def test_unknown_class_is_a_domain_error(tmp_path, capsys):
    code, _, err = _main(capsys, "sq-certify", "--class", "mystery", "--output-dir", str(tmp_path))
    assert code == 4
    assert _error(err)["error"] == "domain_error"


def test_missing_config_file(tmp_path, capsys):
    code, _, err = _main(capsys, "selftest", "--config", str(tmp_path / "absent.json"))
    assert code == 3
    assert "not found" in _error(err)["message"]


def test_programmatic_run(tmp_path):
    run_dir = cli.run("sq-certify", overrides=[f"output_dir={json.dumps(str(tmp_path))}", "experiment.n=2"])
    assert (run_dir / "certificate.json").is_file()


def test_selftest_subcommand(tmp_path, capsys):
    code, out, _ = _main(capsys, "selftest", "--output-dir", str(tmp_path), "--quiet")
    assert code == 0
    rows = json.loads((Path(out) / "selftest.json").read_text(encoding="utf-8"))
    assert all(r["ok"] for r in rows)


@pytest.mark.parametrize(
    "subcommand,overrides",
    [
        ("vqe", ["experiment.n_qubits=[3, 4]", "experiment.ansatz_rows=1", "experiment.steps=20", "experiment.log_every=5", "n_runs=2"]),
        ("landscape-slice", ["experiment.n_qubits=[2, 3]", "experiment.batch_size=8", "experiment.grid_points=5", "n_runs=2"]),
    ],
)
def test_outputs_do_not_depend_on_thread_count(tmp_path, subcommand, overrides):
    tables = {}
    for threads in (1, 4, 8):
        out = tmp_path / f"t{threads}"
        run_dir = cli.run(subcommand, overrides=[*overrides, f"threads={threads}", f"output_dir={json.dumps(str(out))}"])
        tables[threads] = {p.name: p.read_bytes() for p in sorted(run_dir.glob("*.csv"))}
    assert tables[1]
    assert tables[4] == tables[1]
    assert tables[8] == tables[1]
