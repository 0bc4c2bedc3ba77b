"""Poincare ball of radius 2 as a conformal model of the hyperbolic plane.

The warped radius r corresponds to the Euclidean radius rho_E = 2 tanh(r/2)
and the metric is e^{2 phi} times the flat one with e^phi = 4 / (4 - rho_E^2).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import spectral
from .curve import CurveGrid, derive_fields, hconvexity_margin
from .errors import DomainError, NonFinite, NotHConvex
from .quermass import sphere_area

HCONVEX_SLACK = 1e-8


def warped_to_ball_radius(r):
    r = np.asarray(r, dtype=float)
    if np.any(~np.isfinite(r)) or np.any(r < 0):
        raise DomainError("warped radius must be finite and non-negative")
    return 2.0 * np.tanh(0.5 * r)


def ball_to_warped_radius(rho_e):
    rho_e = np.asarray(rho_e, dtype=float)
    if np.any(~np.isfinite(rho_e)) or np.any(rho_e < 0) or np.any(rho_e >= 2.0):
        raise DomainError("ball radius must lie in [0, 2)")
    # log(2 + rho) - log(2 - rho), without cancellation near rho = 0
    return 2.0 * np.arctanh(0.5 * rho_e)


def conformal_factor(rho_e):
    """e^phi = 4 / (4 - rho_E^2)."""
    rho_e = np.asarray(rho_e, dtype=float)
    return 4.0 / (4.0 - rho_e * rho_e)


def polar_curvature(R, R1, R2):
    """Curvature of the Euclidean polar graph (R(theta), theta)."""
    return (R * R + 2.0 * R1 * R1 - R * R2) / (R * R + R1 * R1) ** 1.5


@dataclass(frozen=True)
class BallCurve:
    rho_e: np.ndarray
    rho_e_t1: np.ndarray
    kappa_e: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.rho_e.size

    @property
    def theta(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_nodes) / self.n_nodes

    def radial_normal(self) -> np.ndarray:
        """Radial component <x/|x|, nu> of the outward Euclidean normal."""
        return self.rho_e / np.hypot(self.rho_e, self.rho_e_t1)


def map_curve(curve: CurveGrid) -> BallCurve:
    """Image of the curve in the ball, with its Euclidean curvature.

    Raises
    ------
    NonFinite
        If the image curvature is not finite.
    """
    rho_e = warped_to_ball_radius(curve.rho)
    d1, d2 = spectral.derivatives(rho_e)
    kappa_e = polar_curvature(rho_e, d1, d2)
    if not np.all(np.isfinite(kappa_e)):
        raise NonFinite("non-finite Euclidean curvature")
    return BallCurve(rho_e=rho_e, rho_e_t1=d1, kappa_e=kappa_e)


def conformal_residual(curve: CurveGrid) -> np.ndarray:
    """Per-node e^phi kappa - (kappa_E + d phi(nu)), which vanishes for the
    conformal change of curvature under g = e^{2 phi} g_flat."""
    ball = map_curve(curve)
    kappa = derive_fields(curve).kappa
    rho_e = ball.rho_e
    dphi = 2.0 * rho_e / (4.0 - rho_e * rho_e)
    return conformal_factor(rho_e) * kappa - (ball.kappa_e + dphi * ball.radial_normal())


def ball_convexity_margin(curve: CurveGrid) -> float:
    """min over nodes of kappa_E - 2 / (2 + rho_E); non-negative for
    h-convex curves.

    Raises
    ------
    NotHConvex
        If the hyperbolic margin min kappa - 1 is below -1e-8.
    """
    margin = hconvexity_margin(derive_fields(curve))
    if margin < -HCONVEX_SLACK:
        raise NotHConvex(f"hyperbolic margin {margin:.3e} is negative")
    ball = map_curve(curve)
    return float(np.min(ball.kappa_e - 2.0 / (2.0 + ball.rho_e)))


def rescale_factor(n: int, area: float) -> float:
    """gamma = (|S^n| / area)^(1/n), the dilation giving unit-sphere area."""
    if n < 1 or not area > 0:
        raise DomainError("need n >= 1 and positive area")
    return float((sphere_area(n) / area) ** (1.0 / n))


def write_ball_csv(path, ball: BallCurve):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["theta", "rho_e", "kappa_e"])
        for row in zip(ball.theta, ball.rho_e, ball.kappa_e):
            w.writerow([f"{x:.17g}" for x in row])
