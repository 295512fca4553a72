# tests/test_summaries.py
from __future__ import annotations

import json

import pandas as pd
import pytest

from core.run_io import MANIFEST, write_csv
from core.summaries import compute_trend_delta, load_final_history, per_size_summary


def _final(rows):
    return pd.DataFrame(rows, columns=["run_id", "n_qubits", "layers", "seed", "final_loss", "final_metric"])


def _save(root, kind, digest, created_at, losses):
    d = root / kind / digest
    d.mkdir(parents=True)
    (d / MANIFEST).write_text(json.dumps({"created_at": created_at, "kind": kind}), encoding="utf-8")
    rows = [(f"r{i}", 3, 2, 0, loss, 1.0 - loss) for i, loss in enumerate(losses)]
    write_csv(_final(rows), d / "final_scatter.csv")


class TestPerSizeSummary:
    def test_groups(self):
        final = _final(
            [
                ("a", 4, 2, 0, 0.1, 0.9),
                ("b", 4, 2, 0, 0.3, 0.7),
                ("c", 4, 2, 0, 0.2, 0.8),
                ("d", 6, 2, 0, 0.5, 0.5),
            ]
        )
        out = per_size_summary(final)
        assert out["n_qubits"].tolist() == [4, 6]
        first = out.iloc[0]
        assert first["count"] == 3
        assert first["median_loss"] == pytest.approx(0.2)
        assert first["min_loss"] == pytest.approx(0.1)
        assert first["max_metric"] == pytest.approx(0.9)

    def test_empty(self):
        assert per_size_summary(pd.DataFrame()).empty


class TestHistory:
    def test_trend_between_latest_two(self, tmp_path):
        _save(tmp_path, "vqe", "aaa", "2024-01-01T00:00:00Z", [0.4, 0.6])
        _save(tmp_path, "vqe", "bbb", "2024-01-02T00:00:00Z", [0.2, 0.2])
        _save(tmp_path, "teacher-student-qcnn", "ccc", "2024-01-03T00:00:00Z", [0.9])
        hist = load_final_history(tmp_path, "vqe")
        assert hist["digest"].tolist() == ["aaa", "bbb"]
        latest, prev, delta = compute_trend_delta(hist, "median_final_loss")
        assert latest == pytest.approx(0.2)
        assert prev == pytest.approx(0.5)
        assert delta == pytest.approx(-0.3)

    def test_max_runs(self, tmp_path):
        for i in range(4):
            _save(tmp_path, "vqe", f"d{i}", f"2024-01-0{i + 1}T00:00:00Z", [0.1 * i])
        assert load_final_history(tmp_path, "vqe", max_runs=2)["digest"].tolist() == ["d2", "d3"]

    def test_no_history(self, tmp_path):
        assert load_final_history(tmp_path, "vqe").empty
        assert compute_trend_delta(pd.DataFrame(), "median_final_loss") == (None, None, None)

    def test_single_point(self):
        assert compute_trend_delta(pd.DataFrame({"x": [1.5]}), "x") == (1.5, None, None)
