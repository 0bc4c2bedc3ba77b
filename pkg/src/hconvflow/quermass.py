"""Quermassintegrals of axisymmetric star-shaped domains in H^{n+1}.

The boundary is the radial graph rho(theta) over S^n depending only on the
polar angle, sampled at the staggered nodes theta_j = (j + 1/2) pi / m.
Derivatives come from the even extension of rho to a periodic grid of 2m
nodes, so rho_theta vanishes at both poles by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, gamma, pi
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import bisect

from . import spectral
from .curve import STRICT_MARGIN, curvature_from_derivatives
from .errors import DomainError, NonFinite, NotStrictlyHConvex, OutOfRange
from .symfunc import elem_sym

R_MIN = 1e-8
R_MAX = 20.0
EQUALITY_TOL = 1e-8
RATIO_TOL = 1e-10


def sphere_area(n: int) -> float:
    """omega_n = |S^n|."""
    return 2.0 * pi ** ((n + 1) / 2.0) / gamma((n + 1) / 2.0)


def staggered_angles(m_nodes):
    return (np.arange(m_nodes) + 0.5) * np.pi / m_nodes


@dataclass(frozen=True)
class AxisymmetricHypersurface:
    n: int
    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=float)
        rho.setflags(write=False)
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")
        if rho.ndim != 1 or rho.size < 32:
            raise DomainError("rho must be one-dimensional with at least 32 nodes")
        if not np.all(np.isfinite(rho)) or np.any(rho <= 0.0):
            raise DomainError("rho must be finite and strictly positive")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "n", int(self.n))

    @property
    def m_nodes(self) -> int:
        return self.rho.size

    @property
    def theta(self) -> np.ndarray:
        return staggered_angles(self.m_nodes)

    @classmethod
    def sphere(cls, n: int, radius: float, m_nodes: int = 128):
        return cls(n, np.full(m_nodes, float(radius)))

    @classmethod
    def from_modes(cls, n: int, base: float, modes: Sequence[Sequence[float]] = (),
                   m_nodes: int = 128):
        """rho = base + sum a_k cos(k theta); only cosine terms are allowed."""
        theta = staggered_angles(m_nodes)
        rho = np.full(m_nodes, float(base))
        for mode in modes:
            if len(mode) != 2:
                raise DomainError("hypersurface modes are (k, amplitude) cosine terms")
            rho = rho + mode[1] * np.cos(mode[0] * theta)
        return cls(n, rho)


@dataclass(frozen=True)
class HypFields:
    theta: np.ndarray
    rho: np.ndarray
    rho_t1: np.ndarray
    phi: np.ndarray
    phi_p: np.ndarray
    Phi: np.ndarray
    v: np.ndarray
    u: np.ndarray
    kappa_mer: np.ndarray
    kappa_rot: np.ndarray
    area_weight: np.ndarray
    n: int

    def spectrum(self) -> np.ndarray:
        """Principal curvatures per node, shape (m, n): one meridian entry
        followed by n - 1 copies of the rotational one."""
        rot = np.repeat(self.kappa_rot[:, None], self.n - 1, axis=1)
        return np.concatenate([self.kappa_mer[:, None], rot], axis=1)

    def margin(self) -> float:
        return float(self.spectrum().min() - 1.0)


def _even_derivatives(rho):
    ext = np.concatenate([rho, rho[::-1]])
    d1, d2 = spectral.derivatives(ext)
    m = rho.size
    return d1[:m], d2[:m]


def hyp_fields(hyp: AxisymmetricHypersurface) -> HypFields:
    """Per-node geometry: meridian and rotational principal curvatures and
    the area element of the boundary (including the S^{n-1} factor).

    Raises
    ------
    NonFinite
        If any derived value is NaN or infinite.
    """
    n = hyp.n
    rho = hyp.rho
    theta = hyp.theta
    rho_t1, rho_t2 = _even_derivatives(rho)
    phi = np.sinh(rho)
    phi_p = np.cosh(rho)
    v = np.hypot(phi, rho_t1)
    u = phi * phi / v
    k_mer = curvature_from_derivatives(rho, rho_t1, rho_t2)
    sin = np.sin(theta)
    k_rot = (phi_p - rho_t1 * np.cos(theta) / (sin * phi)) / v
    weight = sphere_area(n - 1) * v * (phi * sin) ** (n - 1)
    for name, arr in (("kappa_mer", k_mer), ("kappa_rot", k_rot), ("area_weight", weight)):
        if not np.all(np.isfinite(arr)):
            raise NonFinite(f"non-finite {name}")
    return HypFields(theta=theta, rho=rho, rho_t1=rho_t1, phi=phi, phi_p=phi_p,
                     Phi=phi_p - 1.0, v=v, u=u, kappa_mer=k_mer, kappa_rot=k_rot,
                     area_weight=weight, n=n)


def _polar_weights(m, n):
    """Weights w with sum_j w_j g(theta_j) ~ int_0^pi g(theta) dtheta for
    g = F * sin^{n-1} with F smooth and even.

    For odd n the integrand is a smooth even periodic function and the
    midpoint rule is spectrally accurate. For even n one factor sin(theta)
    is absorbed into Fejer's first rule in x = cos(theta).
    """
    theta = staggered_angles(m)
    if n % 2 == 1:
        return np.full(m, np.pi / m)
    k = np.arange(1, m // 2 + 1)
    series = np.cos(2.0 * np.outer(theta, k)) / (4.0 * k * k - 1.0)
    fejer = 2.0 / m * (1.0 - 2.0 * series.sum(axis=1))
    return fejer / np.sin(theta)


def surface_integral(fields: HypFields, values) -> float:
    """Integral of a per-node quantity against the boundary area element."""
    w = _polar_weights(fields.rho.size, fields.n)
    return float(np.sum(w * fields.area_weight * np.asarray(values)))


_GL_X, _GL_W = np.polynomial.legendre.leggauss(32)


def _gauss_integral(func, upper):
    """int_0^upper func(s) ds by composite 32-point Gauss-Legendre on
    panels of width at most one. ``upper`` may be an array."""
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    panels = max(1, int(np.ceil(upper.max())))
    total = np.zeros_like(upper)
    for p in range(panels):
        a = upper * p / panels
        b = upper * (p + 1) / panels
        s = 0.5 * (b - a)[:, None] * _GL_X[None, :] + 0.5 * (a + b)[:, None]
        total += 0.5 * (b - a) * (func(s) @ _GL_W)
    return total


def _sinh_power_integral(n, rho):
    return _gauss_integral(lambda s: np.sinh(s) ** n, rho)


def enclosed_volume(hyp: AxisymmetricHypersurface) -> float:
    """omega_{n-1} int sin^{n-1} theta int_0^rho sinh^n s ds dtheta."""
    n = hyp.n
    inner = _sinh_power_integral(n, hyp.rho)
    w = _polar_weights(hyp.m_nodes, n)
    return float(sphere_area(n - 1) * np.sum(w * np.sin(hyp.theta) ** (n - 1) * inner))


def binomial_modified(W, n):
    """Wt_k = sum_i (-1)^{k-i} binom(k, i) W_i for k = 0..n."""
    return np.array([sum((-1) ** (k - i) * comb(k, i) * W[i] for i in range(k + 1))
                     for k in range(n + 1)])


@dataclass(frozen=True)
class QuermassVector:
    """Quermassintegrals, modified quermassintegrals and curvature integrals.

    ``Wt`` is the binomial combination of ``W``; ``Wt_recursion`` is built
    independently from the shifted curvature integrals. The residual
    arrays are differences between the two sides of integral identities and
    vanish for smooth closed hypersurfaces.
    """

    n: int
    W: np.ndarray
    Wt: np.ndarray
    Wt_recursion: np.ndarray
    curvature_integrals: np.ndarray
    shifted_integrals: np.ndarray
    weighted_phi_u: np.ndarray
    weighted_phip_u: np.ndarray
    weighted_u: np.ndarray
    minkowski_residuals: np.ndarray
    shifted_minkowski_residuals: np.ndarray
    top_shifted_residual: float
    gauss_bonnet_residual: float
    area: float
    volume: float
    margin: float

    @property
    def h_convex(self) -> bool:
        return self.margin >= 0.0

    def wt_route_gap(self) -> float:
        """Largest relative disagreement between the two routes to Wt."""
        scale = np.maximum(np.abs(self.Wt), np.abs(self.Wt_recursion))
        scale = np.where(scale > 0, scale, 1.0)
        return float(np.max(np.abs(self.Wt - self.Wt_recursion) / scale))

    def to_dict(self) -> Dict[str, object]:
        out = {}
        for key, val in self.__dict__.items():
            out[key] = val.tolist() if isinstance(val, np.ndarray) else val
        out["h_convex"] = self.h_convex
        out["wt_route_gap"] = self.wt_route_gap()
        return out


def quermass_vector(hyp: AxisymmetricHypersurface) -> QuermassVector:
    f = hyp_fields(hyp)
    n = hyp.n
    spec = f.spectrum()
    E = elem_sym(spec)
    Et = elem_sym(spec - 1.0)
    integ = lambda vals: surface_integral(f, vals)

    curv = np.array([integ(E[:, k]) for k in range(n + 1)])
    shifted = np.array([integ(Et[:, k]) for k in range(n + 1)])
    w_phi_u = np.array([integ((f.Phi - f.u) * Et[:, k]) for k in range(n + 1)])
    w_phip_u = np.array([integ((f.phi_p - f.u) * Et[:, k]) for k in range(n + 1)])
    w_u = np.array([integ(f.u * Et[:, k]) for k in range(n + 1)])

    area = curv[0]
    volume = enclosed_volume(hyp)
    omega = sphere_area(n)

    W = np.empty(n + 2)
    W[0] = volume
    W[1] = area / n
    for k in range(1, n):
        W[k + 1] = (curv[k] - k * W[k - 1]) / (n - k)
    W[n + 1] = omega / (n + 1)

    Wt = binomial_modified(W, n)
    Wr = np.empty(n + 1)
    Wr[0] = volume
    Wr[1] = W[1] - W[0]
    for k in range(1, n):
        Wr[k + 1] = (shifted[k] - (n - 2 * k) * Wr[k]) / (n - k)

    mink = np.array([integ(f.phi_p * E[:, k] - f.u * E[:, k + 1]) for k in range(n)])
    smink = np.array([w_phip_u[k] - w_u[k + 1] for k in range(n)])
    gb = curv[n] - omega - n * W[n - 1]

    return QuermassVector(
        n=n, W=W, Wt=Wt, Wt_recursion=Wr, curvature_integrals=curv,
        shifted_integrals=shifted, weighted_phi_u=w_phi_u, weighted_phip_u=w_phip_u,
        weighted_u=w_u, minkowski_residuals=mink, shifted_minkowski_residuals=smink,
        top_shifted_residual=float(shifted[n] - (omega - n * Wt[n])),
        gauss_bonnet_residual=float(gb), area=float(area), volume=float(volume),
        margin=float(spec.min() - 1.0))


def _check_nk(n, k):
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    if not 0 <= k <= n:
        raise DomainError(f"k={k} outside [0, {n}]")


def ft(n: int, k: int, r):
    """Modified quermassintegral of the geodesic ball of radius r.

    Integrates d/dr Wt_k(B_r) = omega_n sinh^{n-k} r e^{-kr} from 0, which
    avoids the cancellation in the alternating binomial sum at large r.
    """
    _check_nk(n, k)
    r = np.asarray(r, dtype=float)
    val = sphere_area(n) * _gauss_integral(
        lambda s: np.sinh(s) ** (n - k) * np.exp(-k * s), r.ravel())
    return val.reshape(r.shape) if r.ndim else float(val[0])


def ball_quermass(n: int, r: float) -> np.ndarray:
    """W_0..W_{n+1} of the geodesic ball from its boundary curvature
    integrals, omega_n sinh^{n-k} r cosh^k r."""
    omega = sphere_area(n)
    W = np.empty(n + 2)
    W[0] = omega * float(_sinh_power_integral(n, r)[0])
    W[1] = omega * np.sinh(r) ** n / n
    for k in range(1, n):
        W[k + 1] = (omega * np.sinh(r) ** (n - k) * np.cosh(r) ** k - k * W[k - 1]) / (n - k)
    W[n + 1] = omega / (n + 1)
    return W


def ht(n: int, k: int, r: float) -> float:
    _check_nk(n, k)
    weighted = sphere_area(n) * np.sinh(r) ** (n - k) * np.exp(-k * r) * np.expm1(-r)
    return float(weighted + (n - 2 * k) * ft(n, k, r))


def ball_profile(n: int, k: int, r: float) -> Tuple[float, float, float]:
    """(f_k, ft_k, ht_k) of the geodesic ball of radius r.

    Raises
    ------
    DomainError
        If k is outside [0, n] or r is not positive.
    """
    _check_nk(n, k)
    if not r > 0:
        raise DomainError("radius must be positive")
    return float(ball_quermass(n, r)[k]), ft(n, k, r), ht(n, k, r)


def invert_ft(n: int, k: int, target: float) -> float:
    """Radius r in (1e-8, 20] with ft_k(r) = target, by bisection.

    Raises
    ------
    OutOfRange
        If the target is not bracketed on that interval.
    """
    _check_nk(n, k)
    lo, hi = ft(n, k, R_MIN), ft(n, k, R_MAX)
    if not (np.isfinite(target) and lo <= target <= hi):
        raise OutOfRange(f"target {target!r} outside [{lo:.3e}, {hi:.3e}] for n={n}, k={k}")
    if target == lo:
        return R_MIN
    return float(bisect(lambda r: ft(n, k, r) - target, R_MIN, R_MAX,
                        xtol=1e-300, rtol=1e-12, maxiter=500))


@dataclass(frozen=True)
class Deficit:
    lhs: float
    rhs: float
    deficit: float
    scale: float
    equality: bool

    def to_dict(self):
        return dict(self.__dict__)


def _deficit(lhs, rhs):
    scale = max(abs(lhs), abs(rhs))
    d = lhs - rhs
    return Deficit(lhs=float(lhs), rhs=float(rhs), deficit=float(d), scale=float(scale),
                   equality=bool(abs(d) <= EQUALITY_TOL * scale))


@dataclass(frozen=True)
class DeficitReport:
    n: int
    af: Dict[Tuple[int, int], Deficit]
    weighted: Dict[int, Deficit]
    inradius_lower_bound: float

    def to_dict(self):
        return {
            "n": self.n,
            "af": {f"{k},{l}": d.to_dict() for (k, l), d in sorted(self.af.items())},
            "weighted": {str(k): d.to_dict() for k, d in sorted(self.weighted.items())},
            "inradius_lower_bound": self.inradius_lower_bound,
        }


def _require_strict(qv):
    if qv.margin < STRICT_MARGIN:
        raise NotStrictlyHConvex(f"principal curvature margin {qv.margin:.3e} below {STRICT_MARGIN:g}")


def af_deficits(hyp: AxisymmetricHypersurface, qv: Optional[QuermassVector] = None) -> DeficitReport:
    """Deficits of Wt_k >= ft_k(ft_l^{-1}(Wt_l)) for 0 <= l < k <= n and of
    int (Phi - u) E_k(kt) + (n - 2k) Wt_k >= ht_k(ft_k^{-1}(Wt_k)) for 1 <= k <= n.

    Raises
    ------
    NotStrictlyHConvex
        If some principal curvature is not above 1 + 1e-6.
    """
    qv = quermass_vector(hyp) if qv is None else qv
    _require_strict(qv)
    n = hyp.n
    radii = [invert_ft(n, k, qv.Wt[k]) for k in range(n + 1)]
    af = {}
    for k in range(1, n + 1):
        for l in range(k):
            af[(k, l)] = _deficit(qv.Wt[k], ft(n, k, radii[l]))
    weighted = {}
    for k in range(1, n + 1):
        lhs = qv.weighted_phi_u[k] + (n - 2 * k) * qv.Wt[k]
        weighted[k] = _deficit(lhs, ht(n, k, radii[k]))
    return DeficitReport(n=n, af=af, weighted=weighted,
                         inradius_lower_bound=float(hyp.rho.min()))


def stability_f_sphere(s):
    return np.sqrt(s) + s ** 0.25


@dataclass(frozen=True)
class SphereStability:
    radius: float
    dist: float
    deficit_af: float
    deficit_w: float
    ratio_af: Optional[float]
    ratio_w: Optional[float]


def _ratio(dist, d: Deficit):
    if d.deficit <= RATIO_TOL * d.scale:
        return None
    return float(dist / stability_f_sphere(d.deficit))


def sphere_stability_ratio(hyp: AxisymmetricHypersurface, k: int,
                           report: Optional[DeficitReport] = None) -> SphereStability:
    """Distance to the best origin-centred sphere over f(deficit), with
    f(s) = s^(1/2) + s^(1/4), for the pair (k+1, k) and the weighted
    inequality of order k. Ratios are None in the equality case."""
    if not 1 <= k <= hyp.n - 1:
        raise DomainError(f"k={k} outside [1, {hyp.n - 1}]")
    report = af_deficits(hyp) if report is None else report
    rmax, rmin = float(hyp.rho.max()), float(hyp.rho.min())
    dist = 0.5 * (rmax - rmin)
    d_af = report.af[(k + 1, k)]
    d_w = report.weighted[k]
    return SphereStability(radius=0.5 * (rmax + rmin), dist=dist,
                           deficit_af=d_af.deficit, deficit_w=d_w.deficit,
                           ratio_af=_ratio(dist, d_af), ratio_w=_ratio(dist, d_w))
