"""Star-shaped closed curves in the hyperbolic plane as radial graphs.

A curve is stored as the hyperbolic distance ``rho`` from the origin,
sampled on the uniform periodic grid theta_j = 2*pi*j/N. All geometry is
derived pointwise from rho and its Fourier derivatives, and all global
functionals are periodic trapezoid sums.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import spectral
from .errors import DomainError, NonFinite

TOL_QUAD = 1e-8
STRICT_MARGIN = 1e-6


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class CurveGrid:
    """Radial graph rho(theta) of a closed curve on a uniform periodic grid."""

    rho: np.ndarray

    def __post_init__(self):
        rho = _frozen(self.rho)
        if rho.ndim != 1:
            raise DomainError("rho must be one-dimensional")
        n = rho.size
        if n < 16 or n % 2:
            raise DomainError(f"n_nodes must be even and >= 16, got {n}")
        if not np.all(np.isfinite(rho)) or np.any(rho <= 0.0):
            raise DomainError("rho must be finite and strictly positive")
        object.__setattr__(self, "rho", rho)

    @property
    def n_nodes(self) -> int:
        return self.rho.size

    @property
    def theta(self) -> np.ndarray:
        return grid_angles(self.n_nodes)

    @property
    def dtheta(self) -> float:
        return 2.0 * np.pi / self.n_nodes

    @classmethod
    def circle(cls, radius: float, n_nodes: int = 256) -> "CurveGrid":
        return cls(np.full(n_nodes, float(radius)))

    @classmethod
    def from_modes(cls, base: float, modes: Sequence[Sequence[float]] = (),
                   n_nodes: int = 256) -> "CurveGrid":
        """Build rho = base + sum(a cos(k theta) + b sin(k theta)).

        Each entry of ``modes`` is ``(k, a)`` or ``(k, a, b)``.
        """
        return cls(fourier_profile(base, modes, grid_angles(n_nodes)))


def grid_angles(n_nodes):
    return 2.0 * np.pi * np.arange(n_nodes) / n_nodes


def fourier_profile(base, modes, theta):
    theta = np.asarray(theta, dtype=float)
    rho = np.full_like(theta, float(base))
    for mode in modes:
        k, a = mode[0], mode[1]
        b = mode[2] if len(mode) > 2 else 0.0
        rho = rho + a * np.cos(k * theta) + b * np.sin(k * theta)
    return rho


@dataclass(frozen=True)
class GeomFields:
    """Per-node geometry of a radial graph."""

    rho: np.ndarray
    rho_t1: np.ndarray
    rho_t2: np.ndarray
    phi: np.ndarray
    phi_p: np.ndarray
    Phi: np.ndarray
    v: np.ndarray
    u: np.ndarray
    kappa: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.rho.size

    @property
    def dtheta(self) -> float:
        return 2.0 * np.pi / self.rho.size


def curvature_from_derivatives(rho, rho_t1, rho_t2):
    """Geodesic curvature of the radial graph (rho, theta) in H^2."""
    phi = np.sinh(rho)
    phi_p = np.cosh(rho)
    num = phi * phi * phi_p + 2.0 * rho_t1 * rho_t1 * phi_p - rho_t2 * phi
    return num / (phi * phi + rho_t1 * rho_t1) ** 1.5


def derive_fields(curve: CurveGrid) -> GeomFields:
    """Compute derivatives, support function, curvature and weights per node.

    Raises
    ------
    NonFinite
        If any derived quantity is NaN or infinite.
    """
    rho = curve.rho
    rho_t1, rho_t2 = spectral.derivatives(rho)
    phi = np.sinh(rho)
    phi_p = np.cosh(rho)
    Phi = phi_p - 1.0
    v = np.hypot(phi, rho_t1)
    u = phi * phi / v
    kappa = curvature_from_derivatives(rho, rho_t1, rho_t2)
    for name, arr in (("rho_t1", rho_t1), ("rho_t2", rho_t2), ("v", v),
                      ("kappa", kappa), ("phi_p", phi_p)):
        if not np.all(np.isfinite(arr)):
            raise NonFinite(f"non-finite {name} (invalid or under-resolved curve)")
    return GeomFields(*(_frozen(a) for a in
                        (rho, rho_t1, rho_t2, phi, phi_p, Phi, v, u, kappa)))


@dataclass(frozen=True)
class CurveFunctionals:
    length: float
    area: float
    hk_q: Optional[float]
    weighted_m: float
    mink_residual: float
    kappa_min: float
    kappa_max: float
    rho_min: float
    rho_max: float

    @property
    def la(self) -> float:
        return self.length - self.area


def functionals(fields: GeomFields) -> CurveFunctionals:
    """Length, area, Heintze-Karcher functional, weighted functional M and
    the Minkowski residual, all by the periodic trapezoid rule.

    ``hk_q`` is None unless the curve is strictly h-convex on the grid
    (min kappa - 1 >= 1e-6).
    """
    f = fields
    v = f.v
    km1 = f.kappa - 1.0
    length = spectral.trapezoid(v)
    area = spectral.trapezoid(f.Phi)
    if km1.min() >= STRICT_MARGIN:
        hk_q = spectral.trapezoid(((f.phi_p - f.u) / km1 - f.u) * v)
    else:
        hk_q = None
    weighted_m = spectral.trapezoid((f.Phi - f.u) * km1 * v)
    mink = spectral.trapezoid((f.phi_p - f.kappa * f.u) * v)
    return CurveFunctionals(
        length=float(length), area=float(area),
        hk_q=None if hk_q is None else float(hk_q),
        weighted_m=float(weighted_m), mink_residual=float(mink),
        kappa_min=float(f.kappa.min()), kappa_max=float(f.kappa.max()),
        rho_min=float(f.rho.min()), rho_max=float(f.rho.max()),
    )


def dissipation(fields: GeomFields) -> float:
    """2 * integral of (kappa - 1) |d Phi / ds|^2 over the curve.

    Along the flow this equals -dM/dt.
    """
    f = fields
    dPhi_ds = f.phi * f.rho_t1 / f.v
    return float(2.0 * spectral.trapezoid((f.kappa - 1.0) * dPhi_ds ** 2 * f.v))


def hconvexity_margin(fields: GeomFields) -> float:
    """min kappa - 1; positive exactly when the grid curve is strictly h-convex."""
    return float(fields.kappa.min() - 1.0)


@dataclass(frozen=True)
class BestCircle:
    a: float
    dist: float
    a_mean: float


def best_circle(curve: CurveGrid) -> BestCircle:
    """Origin-centred circle minimising sup |rho - a| (midrange radius).

    The mean radius is reported alongside for comparison.
    """
    rmax = float(curve.rho.max())
    rmin = float(curve.rho.min())
    return BestCircle(a=0.5 * (rmax + rmin), dist=0.5 * (rmax - rmin),
                      a_mean=float(np.mean(curve.rho)))


def stability_f_curve(s):
    return np.sqrt(s) + s ** (1.0 / 6.0)


@dataclass(frozen=True)
class InequalityReport:
    lhs: float
    rhs: float
    deficit: float
    stability_ratio: Optional[float]
    circle_radius: float
    circle_dist: float
    circle_mean_radius: float
    margin: float


def inequality_report(fields: GeomFields, tol_quad: float = TOL_QUAD) -> InequalityReport:
    """Deficit of  M + (L - A) >= (L - A)^2 / (2 pi)  and its stability ratio.

    The ratio dist / f(deficit), with f(s) = s^(1/2) + s^(1/6), is only
    reported for strictly h-convex curves whose deficit exceeds ``tol_quad``.
    """
    fn = functionals(fields)
    la = fn.la
    lhs = fn.weighted_m + la
    rhs = la * la / (2.0 * np.pi)
    deficit = lhs - rhs
    bc = best_circle(CurveGrid(fields.rho))
    margin = hconvexity_margin(fields)
    ratio = None
    if margin >= STRICT_MARGIN and deficit > tol_quad:
        ratio = float(bc.dist / stability_f_curve(deficit))
    return InequalityReport(lhs=float(lhs), rhs=float(rhs), deficit=float(deficit),
                            stability_ratio=ratio, circle_radius=bc.a,
                            circle_dist=bc.dist, circle_mean_radius=bc.a_mean,
                            margin=margin)


def write_curve_csv(path, curve: CurveGrid):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["theta", "rho"])
        for th, r in zip(curve.theta, curve.rho):
            w.writerow([f"{th:.17g}", f"{r:.17g}"])


def read_profile_csv(path):
    """Read a "theta,rho" CSV and return the two columns as arrays."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        if header[:2] != ["theta", "rho"]:
            raise DomainError(f"{path}: expected header 'theta,rho', got {header}")
        rows = [(float(a), float(b)) for a, b, *_ in reader if a.strip()]
    data = np.array(rows, dtype=float).reshape(-1, 2)
    return data[:, 0], data[:, 1]


def read_curve_csv(path) -> CurveGrid:
    theta, rho = read_profile_csv(path)
    if not np.allclose(theta, grid_angles(rho.size), rtol=0.0, atol=1e-12):
        raise DomainError(f"{path}: theta column is not the uniform grid 2*pi*j/N")
    return CurveGrid(rho)
