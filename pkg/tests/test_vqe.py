# tests/test_vqe.py
from __future__ import annotations

import numpy as np
import pytest

from core.circuits import build_checkerboard, random_params
from core.errors import DomainError
from core.gradients import forward_with_derivatives
from core.optim import LayerwiseSchedule
from core.statevec import basis_state
from core.vqe import (
    ADAM_LR,
    GD_LR,
    LAYERWISE_LR,
    VqeConfig,
    ansatz_state,
    build_vqe_target,
    dense_hamiltonian,
    ground_state,
    overparameterized_flag,
    run_vqe,
    target_energy,
    trace_distance_to_ground,
    vqe_energy_and_grad,
)


class TestTarget:
    def test_ground_energy_is_zero(self, rng):
        target = build_vqe_target(3, 2, rng)
        evals = np.linalg.eigvalsh(dense_hamiltonian(target))
        assert evals[0] == pytest.approx(0.0, abs=1e-10)
        assert target_energy(target, ground_state(target)) == pytest.approx(0.0, abs=1e-10)

    def test_hamiltonian_is_psd_with_max_2n(self, rng):
        target = build_vqe_target(3, 3, rng)
        evals = np.linalg.eigvalsh(dense_hamiltonian(target))
        assert evals[-1] == pytest.approx(6.0)
        assert np.all(evals > -1e-10)

    def test_trivial_target(self, rng):
        target = build_vqe_target(3, 0, rng)
        assert np.allclose(ground_state(target).amplitudes, basis_state(3, 7).amplitudes)
        assert target_energy(target, basis_state(3, 0)) == pytest.approx(6.0)

    def test_negative_rows(self, rng):
        with pytest.raises(DomainError, match="target_rows"):
            build_vqe_target(3, -1, rng)


class TestEnergyAndGrad:
    def test_matches_dense_and_finite_differences(self, rng):
        target = build_vqe_target(3, 2, rng)
        ansatz = build_checkerboard(3, 2)
        params = random_params(ansatz, rng)
        res = vqe_energy_and_grad(target, ansatz, params)
        psi = ansatz_state(ansatz, params).amplitudes
        assert res.value == pytest.approx(float(np.real(np.vdot(psi, dense_hamiltonian(target) @ psi))))
        eps = 1e-6
        for k in (0, 17, 40):
            plus, minus = params.copy(), params.copy()
            plus[k] += eps
            minus[k] -= eps
            fd = (vqe_energy_and_grad(target, ansatz, plus).value - vqe_energy_and_grad(target, ansatz, minus).value) / (2 * eps)
            assert res.grad[k] == pytest.approx(fd, abs=1e-6)

    def test_trace_distance_of_ground_state(self, rng):
        target = build_vqe_target(2, 1, rng)
        assert trace_distance_to_ground(ground_state(target), target) == pytest.approx(0.0, abs=1e-7)

    @pytest.mark.parametrize("seed", range(4))
    def test_trace_distance_matches_dense_trace_norm(self, seed):
        rng = np.random.default_rng(seed)
        target = build_vqe_target(3, 2, rng)
        ansatz = build_checkerboard(3, 1)
        state = ansatz_state(ansatz, random_params(ansatz, rng))
        g = ground_state(target).amplitudes
        psi = state.amplitudes
        diff = np.outer(psi, psi.conj()) - np.outer(g, g.conj())
        oracle = 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))
        assert trace_distance_to_ground(state, target) == pytest.approx(oracle, abs=1e-7)

    def test_trace_distance_of_orthogonal_state(self, rng):
        target = build_vqe_target(3, 0, rng)
        assert trace_distance_to_ground(basis_state(3, 0), target) == pytest.approx(1.0)

    def test_ansatz_state_skips_derivatives(self, rng, monkeypatch):
        ansatz = build_checkerboard(3, 2)
        params = random_params(ansatz, rng)
        expected = forward_with_derivatives(ansatz, params, basis_state(3, 0).amplitudes)[3]

        def _fail(*args, **kwargs):
            raise AssertionError("derivatives computed for a plain forward pass")

        monkeypatch.setattr("core.vqe.forward_with_derivatives", _fail)
        monkeypatch.setattr("core.gradients.forward_with_derivatives", _fail)
        assert np.allclose(ansatz_state(ansatz, params).amplitudes, expected, atol=1e-12)


class TestConfig:
    def test_learning_rates(self):
        assert VqeConfig(3).resolved_lr == GD_LR
        assert VqeConfig(3, optimizer="adam").resolved_lr == ADAM_LR
        assert VqeConfig(3, layerwise=LayerwiseSchedule()).resolved_lr == LAYERWISE_LR
        assert VqeConfig(3, lr=0.5).resolved_lr == 0.5

    @pytest.mark.parametrize("kw,match", [({"n_qubits": 1}, "at least 2"), ({"optimizer": "sgd"}, "unknown optimizer"), ({"steps": 0}, "steps")])
    def test_invalid(self, kw, match):
        base = {"n_qubits": 3}
        base.update(kw)
        with pytest.raises(DomainError, match=match):
            VqeConfig(**base)

    def test_overparameterized_flag(self):
        assert overparameterized_flag(3, 32)
        assert not overparameterized_flag(3, 31)


class TestRuns:
    @pytest.mark.parametrize("optimizer", ["gd", "adam"])
    def test_energy_decreases(self, optimizer):
        rec = run_vqe(VqeConfig(3, target_rows=1, ansatz_rows=2, optimizer=optimizer, steps=100, log_every=25, seed=3))
        assert [r[0] for r in rec.log] == [0, 25, 50, 75, 100]
        assert rec.final_loss < rec.log[0][1]
        assert rec.extras["expressible"]

    def test_deterministic(self):
        cfg = VqeConfig(3, target_rows=1, ansatz_rows=1, steps=5, log_every=1, seed=9)
        assert run_vqe(cfg).log == run_vqe(cfg).log

    def test_layerwise_grows(self):
        cfg = VqeConfig(
            3, target_rows=2, ansatz_rows=1, steps=25, log_every=100, seed=1, layerwise=LayerwiseSchedule(steps_per_layer=10, max_layers=5)
        )
        rec = run_vqe(cfg)
        growth = [e for e in rec.events if e["event_type"] == "growth"]
        assert [e["step"] for e in growth] == [10, 20]
        assert rec.extras["final_rows"] == 3
        assert growth[0]["lr"] == pytest.approx(LAYERWISE_LR * 0.95)
        # identity rows keep the energy continuous across growth
        assert all(e["loss_before"] == pytest.approx(e["loss_after"], abs=1e-10) for e in growth)
        assert [r[0] for r in rec.log] == [0, 10, 20, 25]
        assert rec.run_id == "vqelw-n03-L01-r000"
