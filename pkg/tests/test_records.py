# tests/test_records.py
from __future__ import annotations

import zlib

import numpy as np
import pytest

from core.errors import DomainError
from core.records import RunRecord, TrainingLog, derive_rng, make_run_id, seed_entropy


class TestSeedStreams:
    def test_entropy_layout(self):
        assert seed_entropy(7, 3, "teacher") == [7, 3, zlib.crc32(b"teacher")]

    def test_same_inputs_same_stream(self):
        a = derive_rng(11, 2, "dataset").standard_normal(5)
        b = derive_rng(11, 2, "dataset").standard_normal(5)
        assert np.array_equal(a, b)

    @pytest.mark.parametrize("other", [(11, 3, "dataset"), (11, 2, "student"), (12, 2, "dataset")])
    def test_distinct_streams(self, other):
        a = derive_rng(11, 2, "dataset").standard_normal(5)
        b = derive_rng(*other).standard_normal(5)
        assert not np.allclose(a, b)


class TestTrainingLog:
    def test_strictly_increasing(self):
        log = TrainingLog()
        log.add(0, 1.0, 0.5)
        log.add(10, 0.5, 0.7)
        with pytest.raises(DomainError, match="does not follow"):
            log.add(10, 0.4, 0.8)
        assert len(log) == 2
        assert log.last == (10, 0.5, 0.7)


class TestRunRecord:
    def test_from_log(self):
        log = TrainingLog()
        log.add(0, 2.0, 0.1)
        log.add(5, 1.0, 0.2)
        rec = RunRecord.from_log(run_id="x", config_digest="d", seed=1, log=log, wall_time=0.5, extras={"n_params": 32})
        assert rec.final == (1.0, 0.2)
        assert rec.summary()["n_params"] == 32

    def test_final_must_match_last_row(self):
        with pytest.raises(DomainError, match="final does not equal"):
            RunRecord("x", "d", 0, [(0, 1.0, 0.0)], (0.5, 0.0), 0.0)

    def test_steps_must_increase(self):
        with pytest.raises(DomainError, match="strictly increasing"):
            RunRecord("x", "d", 0, [(1, 1.0, 0.0), (1, 0.5, 0.0)], (0.5, 0.0), 0.0)

    def test_run_id_format(self):
        assert make_run_id("cb", 6, 12, 7) == "cb-n06-L12-r007"
