"""Curvature flow and quermassintegral inequalities for h-convex domains in
hyperbolic space."""

from .curve import (BestCircle, CurveFunctionals, CurveGrid, GeomFields, InequalityReport,
                    best_circle, derive_fields, functionals, hconvexity_margin,
                    inequality_report)
from .errors import (AbortedMargin, DomainError, HConvFlowError, InsufficientDecay,
                     NonFinite, NotHConvex, NotInCone, NotStrictlyHConvex, OutOfRange)
from .flow import (FlowOptions, FlowState, FlowTrace, Termination, csf_regularize, evolve,
                   fit_decay_rate, flow_rhs, monitor_report, predict_limit_radius,
                   stable_dt, step)
from .quermass import (AxisymmetricHypersurface, QuermassVector, af_deficits, ball_profile,
                       hyp_fields, invert_ft, quermass_vector, sphere_stability_ratio)
from .ballmodel import (BallCurve, ball_convexity_margin, ball_to_warped_radius, map_curve,
                        warped_to_ball_radius)

__version__ = "0.1.0"
