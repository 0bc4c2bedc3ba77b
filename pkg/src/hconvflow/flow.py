"""Time stepping of the locally constrained flow for h-convex curves.

The normal speed (phi' - u)/(kappa - 1) - u becomes, for a radial graph,

    d rho / dt = (phi' v / phi - phi) / (kappa - 1) - phi,

a quasilinear parabolic equation which is discretised by Fourier
collocation in theta and classical RK4 in time.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import spectral
from .curve import (CurveFunctionals, CurveGrid, GeomFields, curvature_from_derivatives,
                    derive_fields, dissipation, functionals)
from .errors import (AbortedMargin, DomainError, InsufficientDecay, NotHConvex,
                     NotStrictlyHConvex)


class Termination(str, enum.Enum):
    CONVERGED_Q = "converged_Q"
    CONVERGED_SUP = "converged_sup"
    T_MAX_REACHED = "t_max_reached"
    ABORTED_MARGIN = "aborted_margin"


@dataclass(frozen=True)
class FlowOptions:
    cfl: float = 0.25
    t_max: float = 50.0
    q_tol: float = 1e-10
    sup_tol: float = 1e-10
    sample_every: int = 20
    snapshot_every: Optional[int] = None
    margin_floor: float = 1e-6

    def __post_init__(self):
        if not 0.0 < self.cfl < 1.0:
            raise DomainError("cfl must lie in (0, 1)")
        if self.t_max <= 0 or self.sample_every < 1 or self.margin_floor <= 0:
            raise DomainError("t_max, sample_every and margin_floor must be positive")
        if self.q_tol < 0 or self.sup_tol < 0:
            raise DomainError("tolerances must be non-negative")
        if self.snapshot_every is not None and self.snapshot_every < 1:
            raise DomainError("snapshot_every must be positive")


@dataclass(frozen=True)
class FlowState:
    t: float
    curve: CurveGrid
    step_count: int = 0


@dataclass(frozen=True)
class Sample:
    t: float
    step: int
    functionals: CurveFunctionals
    sup_dev: float
    dissipation: float


@dataclass
class FlowTrace:
    initial: CurveGrid
    options: FlowOptions
    a_infinity_predicted: float
    samples: List[Sample] = field(default_factory=list)
    snapshots: List[Tuple[float, CurveGrid]] = field(default_factory=list)
    termination: Optional[Termination] = None
    final: Optional[FlowState] = None

    def column(self, name):
        """Sampled values of a functional (or ``t``/``sup_dev``) as an array."""
        if name in ("t", "step", "sup_dev", "dissipation"):
            return np.array([getattr(s, name) for s in self.samples], dtype=float)
        if name == "la":
            return np.array([s.functionals.la for s in self.samples])
        vals = [getattr(s.functionals, name) for s in self.samples]
        return np.array([np.nan if x is None else x for x in vals], dtype=float)


def _speed(rho, rho_t1, rho_t2, margin_floor, with_diffusivity=False):
    phi = np.sinh(rho)
    phi_p = np.cosh(rho)
    kappa = curvature_from_derivatives(rho, rho_t1, rho_t2)
    km1 = kappa - 1.0
    if not np.all(km1 > margin_floor):
        raise NotStrictlyHConvex(
            f"min kappa - 1 = {km1.min():.3e} is not above the floor {margin_floor:g}")
    v = np.hypot(phi, rho_t1)
    top = phi_p * v / phi - phi
    g = top / km1 - phi
    if with_diffusivity:
        return g, float(np.max(top * phi / (km1 * km1 * v ** 3)))
    return g


def flow_rhs(fields: GeomFields, margin_floor: float = 1e-6) -> np.ndarray:
    """d rho/dt at every node.

    Raises
    ------
    NotStrictlyHConvex
        If min kappa - 1 does not exceed ``margin_floor``.
    """
    return _speed(fields.rho, fields.rho_t1, fields.rho_t2, margin_floor)


def diffusion_coefficient(fields: GeomFields) -> np.ndarray:
    """Pointwise dG/d(rho_thetatheta), the local diffusivity of the flow."""
    f = fields
    km1 = f.kappa - 1.0
    return (f.phi_p * f.v / f.phi - f.phi) * f.phi / (km1 ** 2 * f.v ** 3)


def stable_dt(fields: GeomFields, cfl: float) -> float:
    """Explicit time step cfl * dtheta^2 / max D."""
    if hconvex_margin(fields) <= 0.0:
        raise NotStrictlyHConvex("stable_dt needs kappa > 1 everywhere")
    return float(cfl * fields.dtheta ** 2 / diffusion_coefficient(fields).max())


def hconvex_margin(fields):
    return float(fields.kappa.min() - 1.0)


def _rk4(rho, dt, rhs, k1=None):
    if k1 is None:
        k1 = rhs(rho)
    k2 = rhs(rho + 0.5 * dt * k1)
    k3 = rhs(rho + 0.5 * dt * k2)
    k4 = rhs(rho + dt * k3)
    return rho + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _flow_speed(margin_floor):
    def rhs(rho):
        d1, d2 = spectral.derivatives(rho)
        try:
            return _speed(rho, d1, d2, margin_floor)
        except NotStrictlyHConvex as exc:
            raise AbortedMargin(str(exc)) from None
    return rhs


def step(state: FlowState, dt: float, margin_floor: float = 1e-6) -> FlowState:
    """Advance by one classical RK4 step of size ``dt``.

    Raises
    ------
    AbortedMargin
        If any stage has min kappa - 1 <= ``margin_floor``.
    """
    rho = _rk4(state.curve.rho, dt, _flow_speed(margin_floor))
    if not np.all(np.isfinite(rho)) or np.any(rho <= 0):
        raise AbortedMargin("step produced an invalid radius")
    return FlowState(t=state.t + dt, curve=CurveGrid(rho), step_count=state.step_count + 1)


def limit_radius(la: float) -> float:
    """Radius a of the origin-centred circle with L - A = 2 pi (1 - e^{-a})."""
    if not 0.0 < la < 2.0 * np.pi:
        raise DomainError(f"L - A = {la!r} lies outside (0, 2 pi)")
    return float(-np.log1p(-la / (2.0 * np.pi)))


def predict_limit_radius(curve: CurveGrid) -> float:
    """Radius of the circle the flow converges to, from conservation of L - A."""
    return limit_radius(functionals(derive_fields(curve)).la)


def _sample(state, a_inf):
    f = derive_fields(state.curve)
    return Sample(t=state.t, step=state.step_count, functionals=functionals(f),
                  sup_dev=float(np.max(np.abs(state.curve.rho - a_inf))),
                  dissipation=dissipation(f))


def _converged(sample, opts):
    fn = sample.functionals
    if opts.q_tol > 0 and fn.hk_q is not None and fn.hk_q < opts.q_tol * fn.length:
        return Termination.CONVERGED_Q
    if sample.sup_dev < opts.sup_tol:
        return Termination.CONVERGED_SUP
    return None


def evolve(curve: CurveGrid, opts: FlowOptions = FlowOptions()) -> FlowTrace:
    """Run the flow until convergence or ``opts.t_max``.

    The run stops when Q < q_tol * L (``converged_Q``), when
    sup |rho - a_inf| < sup_tol (``converged_sup``), or at ``t_max``. The
    time step is recomputed from the CFL bound before every step.

    Raises
    ------
    NotStrictlyHConvex
        If the initial curve is not strictly h-convex above the margin floor.
    AbortedMargin
        If the margin floor is hit during the run; the partial trace is
        attached to the exception with termination ``aborted_margin``.
    """
    fields = derive_fields(curve)
    if hconvex_margin(fields) <= opts.margin_floor:
        raise NotStrictlyHConvex(
            f"initial margin {hconvex_margin(fields):.3e} is not above {opts.margin_floor:g}")
    a_inf = limit_radius(functionals(fields).la)
    trace = FlowTrace(initial=curve, options=opts, a_infinity_predicted=a_inf)
    state = FlowState(0.0, curve, 0)
    rhs = _flow_speed(opts.margin_floor)

    trace.samples.append(_sample(state, a_inf))
    if opts.snapshot_every is not None:
        trace.snapshots.append((0.0, curve))
    trace.termination = _converged(trace.samples[-1], opts)
    while trace.termination is None:
        try:
            if state.t >= opts.t_max:
                trace.termination = Termination.T_MAX_REACHED
                break
            rho0 = state.curve.rho
            d1, d2 = spectral.derivatives(rho0)
            k1, dmax = _speed(rho0, d1, d2, opts.margin_floor, with_diffusivity=True)
            dt = min(opts.cfl * (2.0 * np.pi / rho0.size) ** 2 / dmax, opts.t_max - state.t)
            rho = _rk4(rho0, dt, rhs, k1)
            t_next = opts.t_max if opts.t_max - (state.t + dt) < 1e-14 * opts.t_max else state.t + dt
            if not np.all(np.isfinite(rho)) or np.any(rho <= 0):
                raise AbortedMargin("step produced an invalid radius")
            state = FlowState(t_next, CurveGrid(rho), state.step_count + 1)
        except (AbortedMargin, NotStrictlyHConvex, DomainError) as exc:
            trace.termination = Termination.ABORTED_MARGIN
            trace.final = state
            raise AbortedMargin(f"flow aborted at t={state.t:.6g}: {exc}", trace) from None
        last = state.t >= opts.t_max
        if state.step_count % opts.sample_every == 0 or last:
            trace.samples.append(_sample(state, a_inf))
            trace.termination = _converged(trace.samples[-1], opts)
        if opts.snapshot_every is not None and state.step_count % opts.snapshot_every == 0:
            trace.snapshots.append((state.t, state.curve))
    if trace.samples[-1].step != state.step_count:
        trace.samples.append(_sample(state, a_inf))
    trace.final = state
    return trace


@dataclass(frozen=True)
class MonitorReport:
    """Largest violations of the proven flow properties along a trace."""

    la_drift: float
    kappa_min_drop: float
    kappa_max_rise: float
    rho_min_drop: float
    rho_max_rise: float
    m_increase: float
    q_negative: float
    area_rate_error: float
    dissipation_error: float
    n_rate_points: int
    n_dissipation_points: int


def _rel_err(numeric, exact, mask):
    if not np.any(mask):
        return 0.0
    return float(np.max(np.abs(numeric[mask] - exact[mask]) / np.abs(exact[mask])))


def _worst_drop(x):
    """Largest decrease of x below its running maximum."""
    return float(np.max(np.maximum.accumulate(x) - x))


def monitor_report(trace: FlowTrace, rate_floor: float = 1e-6) -> MonitorReport:
    """Check the trace against conservation, maximum principles and the
    rate identities dA/dt = Q and dM/dt = -dissipation.

    Extremal-value entries measure the worst violation of monotonicity
    (kappa_min and rho_min non-decreasing, kappa_max and rho_max
    non-increasing) between any two samples.

    Time derivatives are second-order differences over the (non-uniform)
    sample times; only interior samples with |rate| > ``rate_floor`` are used.
    """
    t = trace.column("t")
    la = trace.column("la")
    kmin = trace.column("kappa_min")
    kmax = trace.column("kappa_max")
    rmin = trace.column("rho_min")
    rmax = trace.column("rho_max")
    m = trace.column("weighted_m")
    q = trace.column("hk_q")
    area = trace.column("area")
    length = trace.column("length")
    diss = trace.column("dissipation")

    la_drift = float(np.max(np.abs(la - la[0])) / abs(la[0]))
    out = dict(
        la_drift=la_drift,
        kappa_min_drop=_worst_drop(kmin),
        kappa_max_rise=_worst_drop(-kmax),
        rho_min_drop=_worst_drop(rmin),
        rho_max_rise=_worst_drop(-rmax),
        m_increase=float(max(0.0, np.max(np.diff(m)))) if m.size > 1 else 0.0,
        q_negative=float(max(0.0, np.nanmax(-q / length))),
    )
    if t.size >= 3:
        dA = np.gradient(area, t)
        dM = np.gradient(m, t)
        inner = np.zeros(t.size, dtype=bool)
        inner[1:-1] = True
        amask = inner & (np.abs(q) > rate_floor) & np.isfinite(q)
        dmask = inner & (np.abs(diss) > rate_floor)
        out.update(area_rate_error=_rel_err(dA, q, amask),
                   dissipation_error=_rel_err(-dM, diss, dmask),
                   n_rate_points=int(amask.sum()), n_dissipation_points=int(dmask.sum()))
    else:
        out.update(area_rate_error=0.0, dissipation_error=0.0,
                   n_rate_points=0, n_dissipation_points=0)
    return MonitorReport(**out)


def dominant_mode(curve: CurveGrid) -> int:
    """Largest-amplitude nonzero Fourier mode of rho - mean(rho); ties go to smaller k."""
    amp = np.abs(spectral.fourier_modes(curve.rho))[1:]
    best = amp.max()
    if best == 0.0:
        raise DomainError("profile has no nonzero Fourier mode")
    return int(np.flatnonzero(amp >= best * (1.0 - 1e-12))[0] + 1)


def fit_decay_rate(trace: FlowTrace) -> Tuple[float, float]:
    """Fitted and linearised exponential decay rates of sup |rho - a_inf|.

    The fit is a least-squares line through (t, log sup_dev) restricted to
    10*sup_tol <= sup_dev <= 0.1*sup_dev(0). The prediction is
    k^2 / (phi'(a) - phi(a)) = k^2 e^a for the dominant initial mode k.
    """
    t = trace.column("t")
    dev = trace.column("sup_dev")
    lo = 10.0 * trace.options.sup_tol
    hi = 0.1 * dev[0]
    mask = (dev >= lo) & (dev <= hi)
    if mask.sum() < 3:
        raise InsufficientDecay("fewer than three samples inside the fit window")
    slope = np.polyfit(t[mask], np.log(dev[mask]), 1)[0]
    k = dominant_mode(trace.initial)
    predicted = k * k * np.exp(trace.a_infinity_predicted)
    return float(-slope), float(predicted)


def csf_regularize(curve: CurveGrid, tau: float, n_steps: int) -> CurveGrid:
    """Evolve by curve shortening for time ``tau`` in ``n_steps`` RK4 substeps.

    In graph form the normal speed -kappa becomes d rho/dt = -kappa v / phi.

    Raises
    ------
    NotHConvex
        If the input has some curvature below 1 - 1e-8.
    DomainError
        If the curve degenerates (min rho < 0.01).
    """
    if tau < 0 or n_steps < 1:
        raise DomainError("tau must be >= 0 and n_steps >= 1")
    fields = derive_fields(curve)
    if hconvex_margin(fields) < -1e-8:
        raise NotHConvex(f"min kappa - 1 = {hconvex_margin(fields):.3e}")
    if fields.kappa.max() <= 1.0:
        raise NotHConvex("no point with kappa > 1")
    if tau == 0:
        return curve

    def rhs(rho):
        d1, d2 = spectral.derivatives(rho)
        phi = np.sinh(rho)
        kappa = curvature_from_derivatives(rho, d1, d2)
        return -kappa * np.hypot(phi, d1) / phi

    rho = curve.rho
    dt = tau / n_steps
    for _ in range(n_steps):
        rho = _rk4(rho, dt, rhs)
        if not np.all(np.isfinite(rho)) or rho.min() < 0.01:
            raise DomainError("curve degenerated under curve shortening")
    return CurveGrid(rho)

