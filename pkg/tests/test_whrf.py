# tests/test_whrf.py
from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.optimize import brentq

from core.errors import DomainError, ResourceError, UnsupportedRegimeError
from core.whrf import (
    TorusPoint,
    WishartField,
    asymptotic_log_density,
    classify_regime,
    density_mass,
    density_mode,
    density_table,
    dof_from_weights,
    embed_torus,
    energy_histogram,
    eval_field,
    find_minimum,
    grad_field,
    log_density_derivative,
    minima_histogram,
    minima_search_table,
    overparam_ratio,
    sample_wishart,
    wrap_angles,
)


class TestDegreesOfFreedom:
    def test_uniform_weights(self):
        assert dof_from_weights([1.0, 1.0, 1.0, 1.0], 3) == pytest.approx(16.0)

    def test_single_weight(self):
        assert dof_from_weights([2.5], 4) == pytest.approx(8.0)

    @pytest.mark.parametrize("alpha,match", [([], "nonempty"), ([1.0, 0.0], "positive")])
    def test_invalid(self, alpha, match):
        with pytest.raises(DomainError, match=match):
            dof_from_weights(alpha, 2)

    @pytest.mark.parametrize("l,m,regime", [(4, 2, "overparameterized"), (4, 4, "underparameterized"), (10, 5, "overparameterized")])
    def test_regime(self, l, m, regime):
        assert classify_regime(overparam_ratio(l, m)) == regime


class TestField:
    def test_embedding_unit_norm(self, rng):
        p = TorusPoint(rng.uniform(-np.pi, np.pi, size=4))
        assert np.linalg.norm(embed_torus(p)) == pytest.approx(1.0)

    def test_embedding_bit_order(self):
        w = embed_torus(TorusPoint([0.0, np.pi / 2]))
        # angle 0 -> factor (1, 0) on bit 0, angle pi/2 -> (0, 1) on bit 1: index 0b10
        assert np.allclose(w, [0, 0, 1, 0])

    def test_identity_field_is_one_everywhere(self, rng):
        f = WishartField(3, 1.0, np.eye(8))
        for _ in range(5):
            assert eval_field(f, TorusPoint(rng.uniform(-np.pi, np.pi, size=3))) == pytest.approx(1.0)

    def test_mean_is_one(self, rng):
        p = TorusPoint([0.3, -1.1, 2.0])
        values = [eval_field(sample_wishart(3, 4, rng), p) for _ in range(4000)]
        assert np.mean(values) == pytest.approx(1.0, abs=0.05)

    def test_gradient_matches_finite_differences(self, rng):
        f = sample_wishart(4, 3, rng)
        p = TorusPoint(rng.uniform(-np.pi, np.pi, size=4))
        g = grad_field(f, p)
        eps = 1e-6
        for i in range(4):
            e = np.zeros(4)
            e[i] = eps
            fd = (eval_field(f, TorusPoint(p.angles + e)) - eval_field(f, TorusPoint(p.angles - e))) / (2 * eps)
            assert g[i] == pytest.approx(fd, abs=1e-7)

    def test_wrap(self):
        assert np.allclose(wrap_angles([np.pi + 0.1, -np.pi - 0.1]), [-np.pi + 0.1, np.pi - 0.1])

    def test_dimension_mismatch(self, rng):
        with pytest.raises(DomainError, match="3-angle point"):
            eval_field(sample_wishart(2, 2, rng), TorusPoint([0.0, 0.0, 0.0]))

    def test_caps(self, rng):
        with pytest.raises(ResourceError, match="dense cap"):
            sample_wishart(13, 2, rng)
        with pytest.raises(DomainError, match="m must be"):
            sample_wishart(2, 0, rng)


class TestMinima:
    def test_descent_is_monotone_and_converges(self, rng):
        f = sample_wishart(3, 2, rng)
        trace = []
        point, energy, ok = find_minimum(f, TorusPoint(rng.uniform(-np.pi, np.pi, size=3)), tol=1e-8, trace=trace)
        assert ok
        assert all(b <= a + 1e-15 for a, b in zip(trace, trace[1:]))
        assert np.max(np.abs(grad_field(f, point))) < 1e-8
        assert energy == pytest.approx(eval_field(f, point))

    def test_search_table(self):
        table = minima_search_table(3, 2, 2, 3, np.random.default_rng(4), max_iters=5000)
        assert list(table.columns) == ["field", "start", "energy", "converged"]
        assert len(table) == 6
        assert (table["energy"] >= -1e-12).all()

    def test_histogram_is_reproducible(self):
        a = minima_histogram(3, 2, 2, 2, np.random.default_rng(9), max_iters=5000)
        b = minima_histogram(3, 2, 2, 2, np.random.default_rng(9), max_iters=5000)
        assert a == b

    def test_energy_histogram(self):
        h = energy_histogram([0.1, 0.2, 0.4], bins=4)
        assert list(h.columns) == ["bin_low", "bin_high", "count"]
        assert h["count"].sum() == 3
        assert h["bin_high"].iloc[-1] == pytest.approx(0.4)

    def test_energy_histogram_keeps_rounding_below_zero(self):
        h = energy_histogram([-1e-15, 0.2, 0.4], bins=4)
        assert h["count"].sum() == 3
        assert h["count"].iloc[0] == 1
        assert h["bin_low"].iloc[0] == 0.0

    @pytest.mark.parametrize("seed", range(5))
    def test_one_angle_minimum_matches_grid_scan(self, seed):
        rng = np.random.default_rng(seed)
        f = sample_wishart(1, 2, rng)
        _, energy, ok = find_minimum(f, TorusPoint(rng.uniform(-np.pi, np.pi, size=1)), tol=1e-9)
        assert ok
        grid = np.linspace(-np.pi, np.pi, 20001)
        scan = min(eval_field(f, TorusPoint([t])) for t in grid)
        assert energy == pytest.approx(scan, abs=1e-6)
        assert energy <= scan + 1e-12


class TestDensity:
    @pytest.mark.parametrize("m,l", [(50.0, 10), (8.0, 4), (3.0, 2)])
    def test_mode_is_stationary(self, m, l):
        mode = density_mode(m, l)
        assert 0.0 < mode < 0.5
        assert log_density_derivative(mode, m, l) == pytest.approx(0.0, abs=1e-8)
        oracle = brentq(lambda e: log_density_derivative(e, m, l), 1e-12, 0.5 - 1e-12)
        assert mode == pytest.approx(oracle, abs=1e-10)

    @pytest.mark.parametrize("m,l", [(50.0, 10), (8.0, 4)])
    def test_normalized(self, m, l):
        assert density_mass(m, l) == pytest.approx(1.0, abs=1e-6)

    def test_mode_is_argmax(self):
        m, l = 50.0, 10
        mode = density_mode(m, l)
        peak = asymptotic_log_density(mode, m, l)
        for e in (mode - 0.01, mode + 0.01, 0.05, 0.4):
            assert asymptotic_log_density(e, m, l) < peak

    def test_unsupported_regime(self):
        with pytest.raises(UnsupportedRegimeError, match="m > l/2"):
            density_mode(2.0, 4)

    @pytest.mark.parametrize("energy", [0.0, 0.5, -0.1])
    def test_out_of_domain(self, energy):
        with pytest.raises(DomainError, match="energy must lie"):
            asymptotic_log_density(energy, 50.0, 10)

    def test_table(self):
        t = density_table(50.0, 10, points=9)
        assert list(t.columns) == ["energy", "log_density"]
        assert t["energy"].between(0.0, 0.5, inclusive="neither").all()
        assert all(math.isfinite(v) for v in t["log_density"])
