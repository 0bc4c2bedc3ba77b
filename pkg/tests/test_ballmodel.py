import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq

from hconvflow.ballmodel import (ball_convexity_margin, ball_to_warped_radius,
                                 conformal_factor, conformal_residual, map_curve,
                                 polar_curvature, rescale_factor, warped_to_ball_radius,
                                 write_ball_csv)
from hconvflow.curve import CurveGrid, derive_fields, hconvexity_margin
from hconvflow.errors import DomainError, NotHConvex
from hconvflow.families import random_hconvex_curves
from hconvflow.quermass import sphere_area


class TestRadiusMap:
    def test_examples(self):
        assert warped_to_ball_radius(0.0) == 0.0
        assert warped_to_ball_radius(1.0) == pytest.approx(0.92423, abs=1e-5)
        assert ball_to_warped_radius(2 * math.tanh(0.5)) == pytest.approx(1.0, rel=1e-15)

    def test_matches_log_form(self):
        rho = np.linspace(0.1, 1.9, 50)
        assert np.allclose(ball_to_warped_radius(rho), np.log(2 + rho) - np.log(2 - rho),
                           rtol=1e-14)

    def test_strictly_increasing(self):
        r = np.logspace(-6, np.log10(20), 1000)
        assert np.all(np.diff(warped_to_ball_radius(r)) > 0)

    def test_round_trip_well_conditioned_range(self):
        # beyond r ~ 13, 2 - rho_E carries fewer than 12 significant digits
        r = np.logspace(-6, math.log10(12.0), 1000)
        assert np.allclose(ball_to_warped_radius(warped_to_ball_radius(r)), r,
                           rtol=1e-12, atol=0)

    def test_inverse_round_trip(self):
        rho = np.linspace(1e-6, 1.999, 1000)
        assert np.allclose(warped_to_ball_radius(ball_to_warped_radius(rho)), rho,
                           rtol=1e-14, atol=0)

    def test_domain(self):
        with pytest.raises(DomainError):
            warped_to_ball_radius(-1.0)
        with pytest.raises(DomainError):
            ball_to_warped_radius(2.0)
        with pytest.raises(DomainError):
            ball_to_warped_radius(-0.1)

    def test_conformal_factor_moderate_radii(self):
        r = np.linspace(1e-6, 8.0, 200)
        assert np.allclose(conformal_factor(warped_to_ball_radius(r)), np.cosh(r / 2) ** 2,
                           rtol=1e-12)


class TestMapCurve:
    @pytest.mark.parametrize("r", [0.3, 1.0, 3.0])
    def test_circle(self, r):
        ball = map_curve(CurveGrid.circle(r, 64))
        assert np.allclose(ball.rho_e, 2 * math.tanh(r / 2))
        assert np.allclose(ball.kappa_e, 1 / (2 * math.tanh(r / 2)), rtol=1e-14)

    @pytest.mark.parametrize("r", [0.3, 1.0, 3.0, 6.0])
    def test_conformal_relation_on_circles(self, r):
        assert np.max(np.abs(conformal_residual(CurveGrid.circle(r, 64)))) <= 1e-10

    def test_conformal_relation_on_perturbed_curves(self):
        for c in random_hconvex_curves(seed=2, count=10):
            assert np.max(np.abs(conformal_residual(c))) <= 1e-9

    def test_curvature_against_chain_rule_oracle(self):
        c = CurveGrid.from_modes(1.0, [(2, 0.1)], 256)
        th = c.theta
        rho, d1, d2 = c.rho, -0.2 * np.sin(2 * th), -0.4 * np.cos(2 * th)
        sech2 = 1 / np.cosh(rho / 2) ** 2
        R = 2 * np.tanh(rho / 2)
        R1 = sech2 * d1
        R2 = sech2 * d2 - sech2 * np.tanh(rho / 2) * d1 ** 2
        assert np.max(np.abs(map_curve(c).kappa_e - polar_curvature(R, R1, R2))) <= 1e-9

    def test_csv(self, tmp_path):
        path = tmp_path / "b.csv"
        write_ball_csv(path, map_curve(CurveGrid.circle(1.0, 16)))
        lines = path.read_text().splitlines()
        assert lines[0] == "theta,rho_e,kappa_e" and len(lines) == 17


class TestConvexityMargin:
    def test_unit_circle(self):
        t = math.tanh(0.5)
        m = ball_convexity_margin(CurveGrid.circle(1.0, 64))
        assert m == pytest.approx(1 / (2 * t) - 2 / (2 + 2 * t), rel=1e-13)
        assert m == pytest.approx(1.0820 - 0.6839, abs=1e-3)

    def test_random_family(self):
        for c in random_hconvex_curves(seed=7, count=100):
            assert ball_convexity_margin(c) > 0

    def test_boundary_fixture(self):
        def margin(eps):
            c = CurveGrid.from_modes(1.0, [(2, eps), (3, 0.4 * eps)], 256)
            return hconvexity_margin(derive_fields(c))
        eps = brentq(margin, 0.01, 0.2, xtol=1e-16)
        c = CurveGrid.from_modes(1.0, [(2, eps), (3, 0.4 * eps)], 256)
        assert ball_convexity_margin(c) >= -1e-8

    def test_rejects_non_hconvex(self):
        with pytest.raises(NotHConvex):
            ball_convexity_margin(CurveGrid.from_modes(1.0, [(2, 0.5)], 64))

    @given(st.floats(0.05, 5.0))
    def test_circles_always_positive(self, r):
        assert ball_convexity_margin(CurveGrid.circle(r, 16)) > 0


def test_rescale_factor():
    assert rescale_factor(2, sphere_area(2)) == pytest.approx(1.0)
    assert rescale_factor(3, 8 * sphere_area(3)) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        rescale_factor(2, 0.0)
