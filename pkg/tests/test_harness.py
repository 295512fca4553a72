# tests/test_harness.py
from __future__ import annotations

import threading

import pytest

from core.errors import DomainError
from core.harness import Job, landscape_run_id, run_pool, run_training_sweep, training_jobs
from core.run_config import config_digest, resolve_config


def _tiny_checkerboard(**top):
    raw = {
        "experiment": {
            "kind": "teacher-student-checkerboard",
            "n_qubits": [2, 3],
            "student_layers": [1, 2],
            "teacher_layers": 1,
            "dataset_size": 4,
            "batch_size": 2,
            "epochs": 2,
            "log_every": 1,
        },
        "n_runs": 2,
    }
    raw.update(top)
    return resolve_config(raw)


class TestRunPool:
    def test_sorted_results(self):
        jobs = [Job("b", lambda: 2), Job("a", lambda: 1), Job("c", lambda: 3)]
        assert run_pool(jobs, 1, quiet=True) == [("a", 1), ("b", 2), ("c", 3)]

    def test_threads_give_same_results(self):
        jobs = [Job(f"r{i:02d}", lambda i=i: i * i) for i in range(12)]
        assert run_pool(jobs, 4, quiet=True) == run_pool(jobs, 1, quiet=True)

    def test_uses_worker_threads(self):
        seen = set()
        lock = threading.Lock()

        def work():
            with lock:
                seen.add(threading.get_ident())
            return 0

        run_pool([Job(f"j{i}", work) for i in range(8)], 3, quiet=True)
        assert threading.get_ident() not in seen

    def test_duplicate_ids(self):
        with pytest.raises(DomainError, match="duplicate"):
            run_pool([Job("a", lambda: 1), Job("a", lambda: 2)], 1, quiet=True)

    def test_bad_thread_count(self):
        with pytest.raises(DomainError, match="threads"):
            run_pool([], 0)

    def test_errors_propagate(self):
        def boom():
            raise DomainError("bad run")

        with pytest.raises(DomainError, match="bad run"):
            run_pool([Job("a", boom)], 2, quiet=True)


class TestTrainingSweep:
    def test_job_grid(self):
        cfg = _tiny_checkerboard()
        ids = [j.run_id for j in training_jobs(cfg, "d")]
        assert len(ids) == 2 * 2 * 2
        assert "cb-n03-L02-r001" in ids

    def test_thread_count_does_not_change_results(self):
        serial = run_training_sweep(_tiny_checkerboard(threads=1), "d", quiet=True)
        parallel = run_training_sweep(_tiny_checkerboard(threads=3), "d", quiet=True)
        assert [r.run_id for r in serial] == sorted(r.run_id for r in serial)
        assert [(r.run_id, r.log) for r in serial] == [(r.run_id, r.log) for r in parallel]

    def test_vqe_layerwise_jobs(self):
        cfg = resolve_config({"experiment": {"kind": "vqe-layerwise", "n_qubits": [3, 4]}, "n_runs": 2})
        ids = [j.run_id for j in training_jobs(cfg, config_digest(cfg))]
        assert ids == ["vqelw-n03-L01-r000", "vqelw-n03-L01-r001", "vqelw-n04-L01-r000", "vqelw-n04-L01-r001"]

    def test_not_a_training_kind(self):
        with pytest.raises(DomainError, match="not a training sweep"):
            training_jobs(resolve_config({"experiment": {"kind": "whrf-density"}}), "d")

    def test_landscape_run_id(self):
        assert landscape_run_id("qcnn", 8, 4, 2) == "lsqcnn-n08-L04-r002"
