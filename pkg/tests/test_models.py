import math

import numpy as np
import pytest

from gradflow import (NegativeRadicandError, allen_cahn, cahn_hilliard,
                      coupling, epitaxy, make_grid, modified_energy,
                      original_energy, phase_field_crystal, quadratize)
from gradflow.models import bulk_density, lin_energy, make_model

from conftest import smooth_field


@pytest.fixture
def grids():
    return {
        "unit": make_grid(32, 32, -0.5, 0.5, -0.5, 0.5),
        "pi": make_grid(32, 32, -np.pi, np.pi, -np.pi, np.pi),
    }


def const(grid, c):
    return np.full(grid.shape, float(c))


class TestBulkPotential:
    def test_double_well_minimum(self, grids):
        g = grids["unit"]
        out = bulk_density(allen_cahn(), g, const(g, 1.0))
        assert np.abs(out).max() == 0.0

    def test_double_well_at_zero(self, grids):
        g = grids["unit"]
        out = bulk_density(allen_cahn(), g, const(g, 0.0))
        assert np.allclose(out, 0.25)

    def test_quartic_pfc(self, grids):
        g = grids["pi"]
        out = bulk_density(phase_field_crystal(), g, const(g, 2.0))
        assert np.allclose(out, 4.0)


class TestQuadratize:
    def test_ac_constant(self, grids):
        g = grids["unit"]
        q = quadratize(allen_cahn(c0=100.0), g, const(g, 1.0))
        assert np.allclose(q, 10.0)

    def test_ch_stabilized(self, grids):
        # F(0)=1/4, stabilizer term 0, radicand 100.25
        g = grids["unit"]
        q = quadratize(cahn_hilliard(kappa=4.0, c0=100.0), g, const(g, 0.0))
        assert np.allclose(q, math.sqrt(100.25))

    def test_mbe_constant(self, grids):
        g = grids["pi"]
        q = quadratize(epitaxy(c0=1.0), g, const(g, 0.7))
        assert np.allclose(q, 1.0)

    def test_pfc_square(self, grids):
        g = grids["pi"]
        q = quadratize(phase_field_crystal(), g, const(g, 0.2))
        assert np.allclose(q, 0.04)

    def test_negative_radicand_reports_location(self, grids):
        g = grids["unit"]
        m = cahn_hilliard(kappa=4.0, c0=0.5)
        phi = const(g, 0.0)
        phi[3, 7] = 1.5  # stabilized density dips below -C0 here
        with pytest.raises(NegativeRadicandError) as err:
            quadratize(m, g, phi)
        assert err.value.index == (3, 7)
        assert err.value.min_value < 0


class TestCoupling:
    def test_ac_at_well_minimum_vanishes(self, grids):
        g = grids["unit"]
        cp = coupling(allen_cahn(c0=100.0), g, const(g, 1.0))
        assert np.abs(cp.g).max() == 0.0 and np.abs(cp.h).max() == 0.0

    def test_pfc_g_and_h(self, grids):
        g = grids["pi"]
        cp = coupling(phase_field_crystal(), g, const(g, 3.0))
        assert np.allclose(cp.g, 3.0)
        assert np.allclose(cp.h, 6.0)

    def test_ac_scalar_value(self, grids):
        # f(0.5) = 0.125 - 0.5 = -0.375, Q = sqrt(F(0.5)+100)
        g = grids["unit"]
        cp = coupling(allen_cahn(c0=100.0), g, const(g, 0.5))
        expected = -0.375 / math.sqrt((0.5 ** 2 - 1.0) ** 2 / 4.0 + 100.0)
        assert np.allclose(cp.g, expected)

    def test_mbe_vector_coupling_bounded(self, grids):
        g = grids["pi"]
        from gradflow.initcond import mbe_benchmark
        cp = coupling(epitaxy(c0=1.0), g, mbe_benchmark(g))
        assert np.isfinite(cp.hx).all() and np.isfinite(cp.hy).all()


class TestEnergies:
    def test_ac_minimum_energy_zero(self, grids):
        g = grids["unit"]
        assert original_energy(allen_cahn(), g, const(g, 1.0)) == pytest.approx(0.0, abs=1e-14)

    def test_ac_constant_closed_form(self, grids):
        # (alpha0/eps^2) * F(0) * |Omega| = 100 * 0.25 * 1 = 25
        g = grids["unit"]
        m = allen_cahn(alpha0=0.01, eps=0.01)
        assert original_energy(m, g, const(g, 0.0)) == pytest.approx(25.0, rel=1e-13)

    def test_mbe_constant_zero(self, grids):
        g = grids["pi"]
        assert original_energy(epitaxy(eps=0.37), g, const(g, 2.2)) == pytest.approx(0.0, abs=1e-13)

    def test_modified_equals_original_at_exact_q(self, grids):
        m_ac = allen_cahn()
        assert modified_energy(m_ac, grids["unit"],
                               const(grids["unit"], 1.0),
                               const(grids["unit"], 10.0)) == pytest.approx(0.0, abs=1e-10)

    def test_modified_energy_mbe_offset(self, grids):
        # -1/2 ||q||^2 + C0|Omega|/2 with q=1, C0=1 cancels exactly
        g = grids["pi"]
        m = epitaxy(c0=1.0)
        assert modified_energy(m, g, const(g, 0.0), const(g, 1.0)) == pytest.approx(0.0, abs=1e-12)


MODELS = {
    "ac": (allen_cahn(), "unit", 0.8, 0.1),
    "ch": (cahn_hilliard(), "unit", 0.8, 0.1),
    "pfc": (phase_field_crystal(), "pi", 0.5, 0.285),
    "mbe": (epitaxy(), "pi", 0.4, 0.0),
}


class TestQuadratizationConsistency:
    @pytest.mark.parametrize("kind", sorted(MODELS))
    def test_modified_matches_original_200_fields(self, grids, kind):
        model, gname, amp, offset = MODELS[kind]
        g = grids[gname]
        for seed in range(200):
            phi = smooth_field(g, seed, amp=amp, offset=offset)
            q = quadratize(model, g, phi)
            eo = original_energy(model, g, phi)
            em = modified_energy(model, g, phi, q)
            assert abs(em - eo) <= 1e-11 * max(1.0, abs(eo))


class TestVariationalConsistency:
    @pytest.mark.parametrize("kind", ["ac", "ch", "pfc"])
    def test_gateaux_derivative_matches_coupling(self, grids, kind):
        # d/de [ w*||Q(phi+e*psi)||^2 ] at e=0 == s_N*(Q*g, psi)
        model, gname, amp, offset = MODELS[kind]
        g = grids[gname]
        phi = smooth_field(g, seed=17, amp=amp, offset=offset)
        psi = smooth_field(g, seed=23, amp=1.0)
        w = model.qweight
        s = model.nonlinear_scale

        def nl_energy(p):
            q = quadratize(model, g, p)
            return w * g.inner(q, q)

        e = 1e-4
        fd = (nl_energy(phi + e * psi) - nl_energy(phi - e * psi)) / (2 * e)
        cp = coupling(model, g, phi)
        exact = s * g.inner(quadratize(model, g, phi) * cp.g, psi)
        assert abs(fd - exact) <= 1e-6 * max(1.0, abs(exact))


class TestSymbols:
    def test_g_symbol_zero_mode_for_conserved_flows(self, grids):
        for kind in ("ch", "pfc"):
            model, gname, _, _ = MODELS[kind]
            G = model.g_symbol(grids[gname])
            assert G[0, 0] == 0.0
            assert G.min() >= 0.0

    def test_g_symbol_nonnegative_all_models(self, grids):
        for kind, (model, gname, _, _) in MODELS.items():
            assert model.g_symbol(grids[gname]).min() >= 0.0

    def test_pfc_l_symbol_indefinite(self, grids):
        L = phase_field_crystal(eps=0.25, beta=1.0).l_symbol(grids["pi"])
        assert L.min() < 0.0 < L.max()

    def test_pfc_rejects_beta_below_eps(self):
        with pytest.raises(ValueError):
            phase_field_crystal(eps=1.0, beta=0.5)

    def test_make_model_dispatch(self):
        assert make_model("ac", alpha0=0.02).alpha0 == 0.02
        with pytest.raises(ValueError):
            make_model("heat")


class TestLinEnergy:
    def test_matches_gradient_quadrature_on_smooth_fields(self, grids):
        # 1/2 (L phi, phi) for allen_cahn equals alpha0/2 * ||grad phi||^2
        g = grids["unit"]
        m = allen_cahn(alpha0=0.01)
        phi = smooth_field(g, seed=2)
        gx, gy = g.gradient(phi)
        direct = 0.5 * m.alpha0 * g.integral(gx * gx + gy * gy)
        assert lin_energy(m, g, phi) == pytest.approx(direct, rel=1e-11)
