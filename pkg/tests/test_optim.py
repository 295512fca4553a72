# tests/test_optim.py
from __future__ import annotations

import numpy as np
import pytest

from core.circuits import build_checkerboard, build_qcnn, forward_array, random_params
from core.errors import DomainError
from core.optim import AdamState, LayerwiseSchedule, adam_step, gd_step, maybe_grow
from core.statevec import basis_state


class TestGdStep:
    def test_update(self):
        assert np.allclose(gd_step([1.0, 2.0], [0.5, -1.0], 0.1), [0.95, 2.1])

    def test_shape_mismatch(self):
        with pytest.raises(DomainError, match="differ in shape"):
            gd_step([1.0, 2.0], [1.0], 0.1)


class TestAdam:
    def test_first_step_moves_by_lr_times_sign(self):
        state = AdamState.fresh(3, lr=0.01)
        state, p = adam_step(state, np.zeros(3), np.array([2.0, -0.5, 1e-3]))
        assert state.step == 1
        assert np.allclose(p, [-0.01, 0.01, -0.01], atol=1e-7)

    def test_matches_reference_recursion(self, rng):
        lr, b1, b2, eps = 0.05, 0.9, 0.999, 1e-8
        state = AdamState.fresh(4, lr)
        p = rng.normal(size=4)
        ref = p.copy()
        m = np.zeros(4)
        v = np.zeros(4)
        for t in range(1, 6):
            g = rng.normal(size=4)
            state, p = adam_step(state, p, g)
            m = b1 * m + (1 - b1) * g
            v = b2 * v + (1 - b2) * g * g
            ref = ref - lr * (m / (1 - b1**t)) / (np.sqrt(v / (1 - b2**t)) + eps)
        assert np.allclose(p, ref)

    @pytest.mark.parametrize("scale", [1e-3, 7.0, 1e4])
    def test_scale_invariant_without_eps(self, rng, scale):
        a = AdamState.fresh(5, 0.01, eps=0.0)
        b = AdamState.fresh(5, 0.01, eps=0.0)
        pa = pb = rng.normal(size=5)
        for _ in range(20):
            g = rng.normal(size=5)
            a, pa = adam_step(a, pa, g)
            b, pb = adam_step(b, pb, scale * g)
        assert np.allclose(pa, pb, rtol=0.0, atol=1e-12)

    def test_wrong_dimension(self):
        with pytest.raises(DomainError, match="Adam state has 2"):
            adam_step(AdamState.fresh(2, 0.1), np.zeros(3), np.zeros(3))

    def test_extended_and_scaled(self):
        state = AdamState.fresh(2, 0.1)
        state, _ = adam_step(state, np.zeros(2), np.ones(2))
        grown = state.extended(3).scaled_lr(0.95)
        assert grown.dim == 5
        assert grown.step == 1
        assert grown.lr == pytest.approx(0.095)
        assert np.all(grown.first_moment[2:] == 0)

    def test_minimizes_quadratic(self):
        state = AdamState.fresh(2, 0.05)
        p = np.array([3.0, -2.0])
        for _ in range(2000):
            state, p = adam_step(state, p, 2 * p)
        assert np.linalg.norm(p) < 1e-2


class TestLayerwise:
    def test_schedule_validation(self):
        with pytest.raises(DomainError, match="lr_decay"):
            LayerwiseSchedule(lr_decay=1.5)
        with pytest.raises(DomainError, match="exceeds"):
            LayerwiseSchedule(max_layers=2, current_layer=3)

    def test_no_growth_off_boundary(self):
        layout = build_checkerboard(4, 1)
        out = maybe_grow(LayerwiseSchedule(steps_per_layer=10), 7, layout, np.zeros(layout.n_params))
        assert not out.grew
        assert out.lr_multiplier == 1.0
        assert out.layout is layout

    def test_no_growth_at_step_zero(self):
        layout = build_checkerboard(4, 1)
        assert not maybe_grow(LayerwiseSchedule(steps_per_layer=10), 0, layout, np.zeros(layout.n_params)).grew

    def test_growth_appends_identity_row(self, rng):
        layout = build_checkerboard(4, 1)
        params = random_params(layout, rng)
        out = maybe_grow(LayerwiseSchedule(steps_per_layer=10, lr_decay=0.9), 10, layout, params)
        grown, new_params, mult = out
        assert out.grew and mult == 0.9
        assert grown.rows == 2
        assert out.schedule.current_layer == 2
        assert new_params.size == grown.n_params
        # zero params32 slots are identity gates, so the output state is unchanged
        psi = basis_state(4, 5).amplitudes
        assert np.allclose(forward_array(grown, new_params, psi), forward_array(layout, params, psi))

    def test_exhausted(self):
        layout = build_checkerboard(4, 1)
        sched = LayerwiseSchedule(steps_per_layer=5, max_layers=1)
        out = maybe_grow(sched, 5, layout, np.zeros(layout.n_params))
        assert out.exhausted and not out.grew

    def test_only_checkerboard(self):
        layout = build_qcnn(4)
        with pytest.raises(DomainError, match="checkerboard"):
            maybe_grow(LayerwiseSchedule(), 5000, layout, np.zeros(layout.n_params))
