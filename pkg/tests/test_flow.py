import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from hconvflow.curve import CurveGrid, derive_fields, functionals, hconvexity_margin
from hconvflow.errors import (AbortedMargin, DomainError, InsufficientDecay, NotHConvex,
                              NotStrictlyHConvex)
from hconvflow.flow import (FlowOptions, FlowState, Termination, csf_regularize,
                            diffusion_coefficient, dominant_mode, evolve, fit_decay_rate,
                            flow_rhs, limit_radius, monitor_report, predict_limit_radius,
                            stable_dt, step)
from hconvflow.flow import _speed


def fixture_curve(n=256):
    return CurveGrid.from_modes(1.0, [(2, 0.1)], n)


class TestFlowRhs:
    @pytest.mark.parametrize("a", [0.5, 1.0, 3.0])
    def test_circles_are_stationary(self, a):
        g = flow_rhs(derive_fields(CurveGrid.circle(a, 64)))
        assert np.max(np.abs(g)) <= 1e-13 * math.sinh(a)

    def test_local_maximum_moves_inward(self):
        rho = np.ones(64)
        rho[10] += 1e-6
        g = flow_rhs(derive_fields(CurveGrid(rho)))
        assert g[10] < 0

    def test_matches_exact_derivative_oracle(self):
        c = fixture_curve(256)
        th = c.theta
        g_ref = _speed(c.rho, -0.2 * np.sin(2 * th), -0.4 * np.cos(2 * th), 1e-6)
        assert np.max(np.abs(flow_rhs(derive_fields(c)) - g_ref)) <= 1e-9

    def test_rejects_non_hconvex(self):
        with pytest.raises(NotStrictlyHConvex):
            flow_rhs(derive_fields(CurveGrid.from_modes(1.0, [(2, 0.5)], 64)))


class TestStableDt:
    def test_circle_diffusivity_is_exp_radius(self):
        f = derive_fields(CurveGrid.circle(1.0, 256))
        assert np.allclose(diffusion_coefficient(f), math.e, rtol=1e-13)
        dtheta = 2 * math.pi / 256
        assert stable_dt(f, 0.4) == pytest.approx(0.4 * dtheta ** 2 / math.e, rel=1e-13)

    def test_diffusivity_matches_finite_difference(self):
        # perturb rho_thetatheta alone and difference the speed
        f = derive_fields(fixture_curve(64))
        h = 1e-6
        gp = _speed(f.rho, f.rho_t1, f.rho_t2 + h, 1e-6)
        gm = _speed(f.rho, f.rho_t1, f.rho_t2 - h, 1e-6)
        assert np.allclose((gp - gm) / (2 * h), diffusion_coefficient(f), rtol=1e-6)

    def test_linear_in_cfl_and_quadratic_in_spacing(self):
        f = derive_fields(fixture_curve(128))
        assert stable_dt(f, 0.0) == 0.0
        assert stable_dt(f, 0.2) == pytest.approx(2 * stable_dt(f, 0.1), rel=1e-15)
        f2 = derive_fields(fixture_curve(256))
        assert stable_dt(f2, 0.25) == pytest.approx(stable_dt(f, 0.25) / 4, rel=1e-10)

    def test_requires_strict_convexity(self):
        with pytest.raises(NotStrictlyHConvex):
            stable_dt(derive_fields(CurveGrid.from_modes(1.0, [(2, 0.5)], 64)), 0.25)


class TestStep:
    def test_circle_unchanged(self):
        s = step(FlowState(0.0, CurveGrid.circle(1.2, 32)), 0.01)
        assert s.t == 0.01 and s.step_count == 1
        assert np.max(np.abs(s.curve.rho - 1.2)) <= 1e-15

    def test_one_step_conserves_l_minus_a(self):
        c = fixture_curve()
        f = derive_fields(c)
        s = step(FlowState(0.0, c), stable_dt(f, 0.25))
        la0 = functionals(f).la
        la1 = functionals(derive_fields(s.curve)).la
        assert abs(la1 - la0) <= 1e-12 * la0

    def test_rk4_global_order(self):
        c = CurveGrid.from_modes(1.0, [(2, 0.05)], 32)
        T = 0.05

        def run(m):
            s = FlowState(0.0, c)
            for _ in range(m):
                s = step(s, T / m)
            return s.curve.rho

        ref = run(4096)
        e1 = np.max(np.abs(run(128) - ref))
        e2 = np.max(np.abs(run(256) - ref))
        assert 16 * 0.8 <= e1 / e2 <= 16 * 1.2

    def test_stage_violation_aborts(self):
        c = fixture_curve(64)
        with pytest.raises(AbortedMargin):
            step(FlowState(0.0, c), 1.0)


class TestLimitRadius:
    def test_circle_inverts_exactly(self):
        assert limit_radius(2 * math.pi * (1 - math.exp(-1))) == pytest.approx(1.0, rel=1e-15)
        assert predict_limit_radius(CurveGrid.circle(1.0)) == pytest.approx(1.0, rel=1e-14)

    def test_small_limit(self):
        assert 0 < limit_radius(1e-12) < 1e-12

    @pytest.mark.parametrize("la", [0.0, -1.0, 2 * math.pi, 10.0])
    def test_domain(self, la):
        with pytest.raises(DomainError):
            limit_radius(la)


class TestEvolve:
    def test_circle_converges_immediately(self):
        tr = evolve(CurveGrid.circle(1.0, 64))
        assert tr.termination is Termination.CONVERGED_Q
        assert tr.final.step_count == 0

    def test_rejects_invalid_start(self):
        with pytest.raises(NotStrictlyHConvex):
            evolve(CurveGrid.from_modes(1.0, [(2, 0.5)], 64))

    def test_unstable_cfl_aborts_with_partial_trace(self):
        with pytest.raises(AbortedMargin) as info:
            evolve(fixture_curve(64), FlowOptions(cfl=0.9, t_max=1.0))
        assert info.value.trace.termination is Termination.ABORTED_MARGIN
        assert len(info.value.trace.samples) >= 1

    def test_t_max_reached(self):
        tr = evolve(fixture_curve(64), FlowOptions(t_max=1e-4, q_tol=0, sup_tol=0))
        assert tr.termination is Termination.T_MAX_REACHED
        assert tr.final.t == 1e-4
        assert tr.samples[-1].t == 1e-4

    def test_options_validation(self):
        for bad in (dict(cfl=0.0), dict(cfl=1.0), dict(t_max=0), dict(sample_every=0),
                    dict(q_tol=-1), dict(margin_floor=0), dict(snapshot_every=0)):
            with pytest.raises(DomainError):
                FlowOptions(**bad)

    def test_full_run_coarse_grid(self):
        opts = FlowOptions(q_tol=0, sample_every=4, snapshot_every=500)
        tr = evolve(fixture_curve(128), opts)
        assert tr.termination is Termination.CONVERGED_SUP
        t = tr.column("t")
        assert np.all(np.diff(t) > 0)
        assert len(tr.snapshots) >= 2
        mon = monitor_report(tr)
        assert mon.la_drift <= 1e-6
        assert mon.m_increase <= 1e-8
        assert mon.q_negative <= 1e-8
        assert max(mon.kappa_min_drop, mon.kappa_max_rise,
                   mon.rho_min_drop, mon.rho_max_rise) <= 1e-6
        assert mon.dissipation_error <= 0.01 and mon.n_dissipation_points > 10
        assert mon.area_rate_error <= 0.01 and mon.n_rate_points > 10
        final = tr.final.curve.rho
        assert np.mean(final) == pytest.approx(tr.a_infinity_predicted, abs=1e-6)
        fitted, predicted = fit_decay_rate(tr)
        assert fitted == pytest.approx(predicted, rel=0.15)


class TestDecayFit:
    def test_dominant_mode(self):
        assert dominant_mode(CurveGrid.from_modes(1.0, [(3, 0.01), (2, 0.05)], 64)) == 2
        assert dominant_mode(CurveGrid.from_modes(1.0, [(3, 0.05), (2, 0.05)], 64)) == 2
        assert dominant_mode(CurveGrid.from_modes(1.0, [(1, 0.0, 0.02)], 64)) == 1
        with pytest.raises(DomainError):
            dominant_mode(CurveGrid.circle(1.0, 64))

    def test_insufficient_decay(self):
        tr = evolve(fixture_curve(64), FlowOptions(t_max=1e-3, q_tol=0, sup_tol=0))
        with pytest.raises(InsufficientDecay):
            fit_decay_rate(tr)


def touching_fixture(n=256):
    """Profile whose grid curvature minimum equals 1 at a single node."""
    def margin(eps):
        c = CurveGrid.from_modes(1.0, [(2, eps), (3, 0.4 * eps)], n)
        return hconvexity_margin(derive_fields(c))
    eps = brentq(margin, 0.01, 0.2, xtol=1e-16)
    return CurveGrid.from_modes(1.0, [(2, eps), (3, 0.4 * eps)], n)


class TestCsf:
    def test_tau_zero_is_identity(self):
        c = fixture_curve(64)
        assert csf_regularize(c, 0.0, 10) is c

    def test_circle_shrinks_like_ode(self):
        tau = 0.05
        out = csf_regularize(CurveGrid.circle(1.0, 32), tau, 50)
        sol = solve_ivp(lambda t, r: -1.0 / np.tanh(r), (0, tau), [1.0],
                        rtol=1e-12, atol=1e-14)
        assert np.ptp(out.rho) <= 1e-14
        assert out.rho[0] == pytest.approx(sol.y[0, -1], rel=1e-10)
        assert out.rho[0] < 1.0

    def test_gains_strict_convexity(self):
        c = touching_fixture()
        assert abs(hconvexity_margin(derive_fields(c))) <= 1e-12
        out = csf_regularize(c, 1e-3, 100)
        assert hconvexity_margin(derive_fields(out)) > 0

    def test_rejects_non_hconvex(self):
        with pytest.raises(NotHConvex):
            csf_regularize(CurveGrid.from_modes(1.0, [(2, 0.5)], 64), 1e-3, 10)

    def test_degeneration(self):
        with pytest.raises(DomainError):
            csf_regularize(CurveGrid.circle(0.5, 32), 2.0, 2000)
