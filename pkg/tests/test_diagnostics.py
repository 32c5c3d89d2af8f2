import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import nsac1d as ns

# independently computed with a 50-digit Lambert-W evaluation of
# y - ln y - 1 = e0 (branches 0 and -1), frozen before implementation
PINNED_BRACKET_ROOTS = {
    0.1: (0.61681683179170517, 1.5162211614250221),
    0.5: (0.30170956268433601, 2.3576766739458991),
    1.0: (0.15859433956303936, 3.1461932206205826),
}


def smooth_state(grid):
    """Closed-form state with analytic derivatives, used as quadrature oracle."""
    x = grid.x
    v = 1.0 + 0.1 * np.exp(-(((x + 2.0) / 2.0) ** 2))
    u = 0.2 * np.exp(-(((x - 2.0) / 2.0) ** 2))
    theta = 1.0 + 0.15 * np.exp(-((x / 2.0) ** 2))
    phi = np.tanh(x / 2.0)
    return ns.state_from_fields(grid, ns.BoundaryConfig(-1.0, 1.0), v, u, theta, phi)


def smooth_state_derivatives(x):
    v = 1.0 + 0.1 * np.exp(-(((x + 2.0) / 2.0) ** 2))
    u = 0.2 * np.exp(-(((x - 2.0) / 2.0) ** 2))
    theta = 1.0 + 0.15 * np.exp(-((x / 2.0) ** 2))
    th = np.tanh(x / 2.0)
    v_x = 0.1 * np.exp(-(((x + 2.0) / 2.0) ** 2)) * (-(x + 2.0) / 2.0)
    u_x = 0.2 * np.exp(-(((x - 2.0) / 2.0) ** 2)) * (-(x - 2.0) / 2.0)
    theta_x = 0.15 * np.exp(-((x / 2.0) ** 2)) * (-x / 2.0)
    phi_x = 0.5 * (1.0 - th**2)
    phi_xx = -0.5 * th * (1.0 - th**2)
    return v, u, theta, th, v_x, u_x, theta_x, phi_x, phi_xx


class TestLyapunovEnergy:
    def test_equilibrium_zero(self, params):
        eq = ns.equilibrium_state(ns.make_grid(8, 64), ns.BoundaryConfig(1.0, 1.0))
        assert ns.lyapunov_energy(eq, params) == 0.0

    def test_uniform_dilation_closed_form(self, params):
        grid = ns.make_grid(16, 512)
        bc = ns.BoundaryConfig(1.0, 1.0)
        state = ns.equilibrium_state(grid, bc)
        state.v[grid.interior] = 2.0
        expected = (2.0 - math.log(2.0) - 1.0) * 32.0
        assert ns.lyapunov_energy(state, params) == pytest.approx(expected, rel=1e-13)

    def test_refined_quadrature_oracle(self, params):
        grid = ns.make_grid(16, 1024)
        got = ns.lyapunov_energy(smooth_state(grid), params)
        fine = ns.make_grid(16, 10240)
        v, u, theta, phi, _, _, _, phi_x, _ = smooth_state_derivatives(fine.x)
        ref = np.sum(0.5 * u**2 + (phi**2 - 1.0) ** 2 / 4.0 + 0.5 * phi_x**2 / v
                     + (v - np.log(v) - 1.0) + (theta - np.log(theta) - 1.0)) * fine.dx
        assert got == pytest.approx(ref, rel=1e-4)

    def test_rejects_nonpositive(self, params):
        grid = ns.make_grid(4, 16)
        state = ns.equilibrium_state(grid, ns.BoundaryConfig(1.0, 1.0))
        state.v[grid.n_ghost] = -0.5
        with pytest.raises(ValueError):
            ns.lyapunov_energy(state, params)


class TestDissipationRate:
    def test_equilibrium_zero(self, params):
        eq = ns.equilibrium_state(ns.make_grid(8, 64), ns.BoundaryConfig(1.0, 1.0))
        assert ns.dissipation_rate(eq, params) == 0.0

    def test_pure_shear_reduces_to_velocity_term(self, params):
        # v = theta = 1, phi = 1: V collapses to sum u_x^2 dx
        grid = ns.make_grid(16, 256)
        bc = ns.BoundaryConfig(1.0, 1.0)
        state = ns.equilibrium_state(grid, bc)
        state.u[:] = np.sin(np.pi * grid.x_with_ghosts / 16.0)
        ns.apply_bc(state, bc)
        u = state.u
        u_x = (u[2:] - u[:-2]) / (2 * grid.dx)
        expected = np.sum(u_x[1:-1] ** 2) * grid.dx
        assert ns.dissipation_rate(state, params) == pytest.approx(expected, rel=1e-14)

    def test_refined_quadrature_oracle(self, params):
        grid = ns.make_grid(16, 1024)
        got = ns.dissipation_rate(smooth_state(grid), params)
        fine = ns.make_grid(16, 10240)
        v, u, theta, phi, v_x, u_x, theta_x, phi_x, phi_xx = smooth_state_derivatives(fine.x)
        mu = (phi**3 - phi) - (phi_xx / v - phi_x * v_x / v**2)
        ref = np.sum(theta * theta_x**2 / (v * theta**2) + u_x**2 / (v * theta)
                     + v * mu**2 / theta) * fine.dx
        assert got == pytest.approx(ref, rel=1e-4)

    def test_zero_iff_flat(self, params):
        grid = ns.make_grid(8, 64)
        bc = ns.BoundaryConfig(1.0, 1.0)
        state = ns.equilibrium_state(grid, bc)
        assert ns.dissipation_rate(state, params) == 0.0
        bump = ns.interface_initial_state(grid, params, bc, u_amp=0.1, u_width=1.0)
        assert ns.dissipation_rate(bump, params) > 0.0
        bump = ns.interface_initial_state(grid, params, bc, theta_amp=0.1, theta_width=1.0)
        assert ns.dissipation_rate(bump, params) > 0.0


class TestBracketRoots:
    def test_zero_energy(self):
        assert ns.bracket_roots(0.0) == (1.0, 1.0)

    def test_euler_point(self):
        # y = e satisfies y - ln y - 1 = e - 2
        _, alpha2 = ns.bracket_roots(math.e - 2.0)
        assert alpha2 == pytest.approx(math.e, abs=1e-10)

    @pytest.mark.parametrize("e0", sorted(PINNED_BRACKET_ROOTS))
    def test_pinned_regression_values(self, e0):
        a1, a2 = ns.bracket_roots(e0)
        want1, want2 = PINNED_BRACKET_ROOTS[e0]
        assert a1 == pytest.approx(want1, abs=1e-10)
        assert a2 == pytest.approx(want2, abs=1e-10)

    @pytest.mark.parametrize("e0", [0.01, 0.1, 0.5, 1.0, 5.0, 30.0])
    def test_defining_equation_residual(self, e0):
        for root in ns.bracket_roots(e0):
            assert abs(root - math.log(root) - 1.0 - e0) <= 1e-12

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            ns.bracket_roots(-0.1)

    @settings(max_examples=50, deadline=None)
    @given(e0=st.floats(1e-6, 50.0))
    def test_roots_bracket_one(self, e0):
        a1, a2 = ns.bracket_roots(e0)
        assert 0.0 < a1 < 1.0 < a2

    @settings(max_examples=50, deadline=None)
    @given(lo=st.floats(1e-4, 10.0), gap=st.floats(1e-3, 10.0))
    def test_monotone_in_e0(self, lo, gap):
        a1_lo, a2_lo = ns.bracket_roots(lo)
        a1_hi, a2_hi = ns.bracket_roots(lo + gap)
        assert a1_hi < a1_lo
        assert a2_hi > a2_lo


class TestCellAverageBrackets:
    def test_equilibrium_no_violations(self, params):
        grid = ns.make_grid(16, 512)
        eq = ns.equilibrium_state(grid, ns.BoundaryConfig(1.0, 1.0))
        report = ns.cell_average_brackets(eq, params, 0.0)
        assert report.count == 0
        assert report.alpha1 == report.alpha2 == 1.0

    def test_constructed_breach_is_flagged(self, params):
        grid = ns.make_grid(16, 512)
        eq = ns.equilibrium_state(grid, ns.BoundaryConfig(1.0, 1.0))
        report0 = ns.cell_average_brackets(eq, params, 0.5)
        eq.v[grid.interior] = 2.0 * report0.alpha2
        report = ns.cell_average_brackets(eq, params, 0.5)
        assert report.count == 32  # every unit interval, v only
        assert all(kind == "v" for kind, _, _ in report.violations)

    def test_rejects_non_integer_half_width(self, params):
        grid = ns.make_grid(8.5, 64)
        eq = ns.equilibrium_state(grid, ns.BoundaryConfig(1.0, 1.0))
        with pytest.raises(ValueError, match="integer"):
            ns.cell_average_brackets(eq, params, 0.0)

    def test_rejects_non_tiling_cells(self, params):
        grid = ns.make_grid(24, 512)  # 512 cells over 48 unit intervals
        eq = ns.equilibrium_state(grid, ns.BoundaryConfig(1.0, 1.0))
        with pytest.raises(ValueError, match="tile"):
            ns.cell_average_brackets(eq, params, 0.0)


class TestCutoffWeight:
    def test_piecewise_values(self):
        assert ns.cutoff_weight(0, 0.0) == 1.0
        assert ns.cutoff_weight(0, 0.5) == 1.0
        assert ns.cutoff_weight(0, 1.0) == 1.0
        assert float(ns.cutoff_weight(0, -2.0)) == pytest.approx(math.exp(-1.0), rel=1e-15)
        assert float(ns.cutoff_weight(0, 3.0)) == pytest.approx(math.exp(-1.0), rel=1e-15)

    def test_shifted_interval(self):
        n = -3
        assert ns.cutoff_weight(n, -3.0) == 1.0
        assert float(ns.cutoff_weight(n, n - 2.0)) == pytest.approx(math.exp(-1.0), rel=1e-15)
        assert float(ns.cutoff_weight(n, n + 3.0)) == pytest.approx(math.exp(-1.0), rel=1e-15)

    def test_vectorized(self):
        x = np.array([-4.0, 0.25, 5.0])
        w = ns.cutoff_weight(0, x)
        assert w.shape == (3,)
        assert np.all((w > 0) & (w <= 1.0))


class TestWeightedDissipation:
    def test_equilibrium_zero(self, params):
        eq = ns.equilibrium_state(ns.make_grid(8, 64), ns.BoundaryConfig(1.0, 1.0))
        assert ns.weighted_dissipation(eq, params, 0.5, 0) == 0.0

    def test_sine_temperature_oracle(self, params):
        grid = ns.make_grid(16, 1024)
        ones = np.ones(grid.n_cells)
        theta = 1.0 + 0.1 * np.sin(np.pi * grid.x / 16.0)
        state = ns.state_from_fields(grid, ns.BoundaryConfig(1.0, 1.0),
                                     ones, 0 * ones, theta, ones)
        got = ns.weighted_dissipation(state, params, 0.5, 0)
        fine = ns.make_grid(16, 10240)
        x = fine.x
        th = 1.0 + 0.1 * np.sin(np.pi * x / 16.0)
        th_x = 0.1 * np.pi / 16.0 * np.cos(np.pi * x / 16.0)
        ref = np.sum(th * th_x**2 / th**1.5 * ns.cutoff_weight(0, x)) * fine.dx
        assert got == pytest.approx(ref, rel=1e-4)

    @pytest.mark.parametrize("alpha", [0.0, 1.0, 1.5, -0.2])
    def test_rejects_alpha_outside_unit_interval(self, params, alpha):
        eq = ns.equilibrium_state(ns.make_grid(8, 64), ns.BoundaryConfig(1.0, 1.0))
        with pytest.raises(ValueError):
            ns.weighted_dissipation(eq, params, alpha, 0)


class TestLemma24Residual:
    def test_zero_at_start(self, params):
        grid = ns.make_grid(16, 128)
        bc = ns.BoundaryConfig(-1.0, 1.0)
        state = ns.interface_initial_state(grid, params, bc, v_amp=0.2, v_width=2.0)
        assert ns.lemma24_residual(state, state.copy()) == 0.0

    def test_equilibrium_run_roundoff(self, params):
        grid = ns.make_grid(8, 64)
        bc = ns.BoundaryConfig(1.0, 1.0)
        eq = ns.equilibrium_state(grid, bc)
        initial = eq.copy()
        result = ns.run(eq, params, bc, 0.3)
        assert ns.lemma24_residual(result.state, initial) <= 1e-12

    def test_rejects_grid_mismatch(self, params):
        bc = ns.BoundaryConfig(1.0, 1.0)
        a = ns.equilibrium_state(ns.make_grid(8, 64), bc)
        b = ns.equilibrium_state(ns.make_grid(8, 128), bc)
        with pytest.raises(ValueError, match="grid"):
            ns.lemma24_residual(a, b)


class TestRecord:
    def test_equilibrium_all_zeros(self, params):
        grid = ns.make_grid(16, 128)
        bc = ns.BoundaryConfig(1.0, 1.0)
        eq = ns.equilibrium_state(grid, bc)
        ctx = ns.make_context(eq, params, weighted_pairs=((0.5, 0),))
        rec = ns.record(eq, params, ctx)
        assert rec.mass_excess == 0.0 and rec.energy_total == 0.0
        assert rec.e_lyap == 0.0 and rec.v_diss == 0.0
        assert rec.phi_min == rec.phi_max == 1.0
        assert rec.v_min == rec.v_max == 1.0
        assert rec.theta_min == rec.theta_max == 1.0
        assert rec.bracket_violations == 0
        assert rec.lemma24_residual == 0.0
        assert rec.weighted[(0.5, 0)] == 0.0

    def test_lyapunov_chain_between_records(self, params, flagship_ic):
        p, grid, bc, state = flagship_ic(256, half_width=32)
        ctx = ns.make_context(state, p)
        recs = [ns.record(state, p, ctx)]
        prev_t = state.t

        def observer(s):
            nonlocal prev_t
            if s.t <= prev_t:
                return
            ctx.diss_cum += (s.t - prev_t) * ns.dissipation_rate(s, p)
            prev_t = s.t
            recs.append(ns.record(s, p, ctx))

        ns.run(state, p, bc, 0.05, observer=observer)
        for a, b in zip(recs, recs[1:]):
            assert (b.e_lyap + (b.diss_cum - a.diss_cum)
                    <= a.e_lyap + 1e-3 * ctx.e0 + 1e-14)


class TestTranslationInvariance:
    def test_functionals_follow_cell_shifts(self, params):
        grid = ns.make_grid(16, 512)
        bc = ns.BoundaryConfig(1.0, 1.0)
        state = ns.interface_initial_state(
            grid, params, bc, v_amp=0.3, v_width=1.0, v_center=0.0,
            u_amp=0.2, u_width=1.0, u_center=0.0,
            theta_amp=0.2, theta_width=1.0, theta_center=0.0)
        shifted = state.copy()
        cells_per_unit = grid.n_cells // 32
        shift = 3 * cells_per_unit  # three unit intervals
        s = grid.interior
        for name in ("v", "u", "theta", "phi"):
            getattr(shifted, name)[s] = np.roll(getattr(state, name)[s], shift)
        ns.apply_bc(shifted, bc)
        for fn in (ns.mass_excess,
                   lambda st: ns.total_energy(st, params),
                   lambda st: ns.lyapunov_energy(st, params),
                   lambda st: ns.dissipation_rate(st, params)):
            a, b = fn(state), fn(shifted)
            assert b == pytest.approx(a, rel=1e-12, abs=1e-12)
        w0 = ns.weighted_dissipation(state, params, 0.5, 0)
        w3 = ns.weighted_dissipation(shifted, params, 0.5, 3)
        assert w3 == pytest.approx(w0, rel=1e-12, abs=1e-12)
