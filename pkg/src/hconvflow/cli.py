"""Command-line front end.

Every run is described by one JSON config file::

    hconvflow simulate --config run.json --out results/

Exit status: 0 success, 2 invalid input, 3 numerical abort, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import fields as dc_fields

import numpy as np

from . import reports
from .ballmodel import ball_convexity_margin, conformal_residual, map_curve, write_ball_csv
from .curve import (STRICT_MARGIN, CurveGrid, derive_fields, functionals, hconvexity_margin,
                    inequality_report, read_curve_csv, read_profile_csv, write_curve_csv)
from .errors import AbortedMargin, HConvFlowError, InsufficientDecay, NonFinite
from .families import random_hconvex_curves
from .flow import (FlowOptions, dominant_mode, evolve, fit_decay_rate, monitor_report)
from .quermass import (AxisymmetricHypersurface, af_deficits, quermass_vector,
                       sphere_stability_ratio, staggered_angles)

COMMANDS = ("simulate", "verify", "scan", "quermass", "rate-fit", "ball-map")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_ABORT = 3
EXIT_IO = 4


class ConfigError(ValueError):
    pass


def _curve_from_config(cfg, require_margin=None):
    spec = cfg.get("curve")
    if not isinstance(spec, dict):
        raise ConfigError("config needs a 'curve' object")
    if "file" in spec:
        curve = read_curve_csv(spec["file"])
    else:
        try:
            base = float(spec["base"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError("curve needs 'base' (or 'file')") from None
        curve = CurveGrid.from_modes(base, [tuple(m) for m in spec.get("modes", [])],
                                     int(spec.get("n_nodes", 256)))
    if require_margin is not None:
        margin = hconvexity_margin(derive_fields(curve))
        if margin <= require_margin:
            raise ConfigError(f"curve margin min kappa - 1 = {margin:.6g} is not above {require_margin:g}")
    return curve


def _hyp_from_config(cfg):
    spec = cfg.get("hypersurface")
    if not isinstance(spec, dict) or "n" not in spec:
        raise ConfigError("config needs a 'hypersurface' object with 'n'")
    n = int(spec["n"])
    if "file" in spec:
        theta, rho = read_profile_csv(spec["file"])
        if not np.allclose(theta, staggered_angles(rho.size), rtol=0.0, atol=1e-12):
            raise ConfigError("hypersurface theta column is not the staggered grid")
        return AxisymmetricHypersurface(n, rho)
    if "base" not in spec:
        raise ConfigError("hypersurface needs 'base' (or 'file')")
    return AxisymmetricHypersurface.from_modes(
        n, float(spec["base"]), [tuple(m) for m in spec.get("modes", [])],
        int(spec.get("m_nodes", 128)))


def _flow_options(cfg):
    raw = dict(cfg.get("flow", {}))
    known = {f.name for f in dc_fields(FlowOptions)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown flow options: {sorted(unknown)}")
    return FlowOptions(**raw)


def _summary(trace):
    final = trace.final.curve
    mon = monitor_report(trace)
    out = {
        "termination": trace.termination,
        "steps": trace.final.step_count,
        "t_final": trace.final.t,
        "a_infinity_predicted": trace.a_infinity_predicted,
        "a_infinity_observed": float(np.mean(final.rho)),
        "final_oscillation": float(final.rho.max() - final.rho.min()),
        "max_rho_drift": float(np.max(np.abs(final.rho - trace.initial.rho))),
        "monitors": mon,
    }
    try:
        fitted, predicted = fit_decay_rate(trace)
        out["rate"] = {"fitted": fitted, "predicted": predicted,
                       "mode": dominant_mode(trace.initial)}
    except (InsufficientDecay, ValueError):
        out["rate"] = None
    return out


def cmd_simulate(cfg, out, args):
    curve = _curve_from_config(cfg, require_margin=STRICT_MARGIN)
    opts = _flow_options(cfg)
    trace = evolve(curve, opts)
    reports.write_trace_csv(os.path.join(out, "trace.csv"), trace)
    if trace.snapshots:
        snap_dir = os.path.join(out, "snapshots")
        os.makedirs(snap_dir, exist_ok=True)
        for i, (_, snap) in enumerate(trace.snapshots):
            write_curve_csv(os.path.join(snap_dir, f"snapshot_{i:05d}.csv"), snap)
    write_curve_csv(os.path.join(out, "final.csv"), trace.final.curve)
    reports.write_json(os.path.join(out, "summary.json"), _summary(trace))


def cmd_verify(cfg, out, args):
    if "hypersurface" in cfg:
        hyp = _hyp_from_config(cfg)
        rep = af_deficits(hyp)
        result = rep.to_dict()
        result["stability"] = {str(k): sphere_stability_ratio(hyp, k, rep)
                               for k in range(1, hyp.n)}
    else:
        curve = _curve_from_config(cfg)
        fields = derive_fields(curve)
        rep = inequality_report(fields)
        tol = float(cfg.get("tol_quad", 1e-8))
        result = {"inequality": rep, "functionals": functionals(fields),
                  "equality": bool(abs(rep.deficit) <= tol)}
    reports.write_json(os.path.join(out, "verify.json"), result)


def _scan_member(item):
    param, curve = item
    rep = inequality_report(derive_fields(curve))
    ratio = float("nan") if rep.stability_ratio is None else rep.stability_ratio
    return [param, rep.deficit, rep.circle_dist, ratio]


def cmd_scan(cfg, out, args):
    scan = cfg.get("scan")
    if not isinstance(scan, dict):
        raise ConfigError("config needs a 'scan' object")
    n_nodes = int(scan.get("n_nodes", 256))
    if "epsilons" in scan:
        base = float(scan.get("base", 1.0))
        mode = int(scan.get("mode", 2))
        items = [(float(e), CurveGrid.from_modes(base, [(mode, float(e))], n_nodes))
                 for e in scan["epsilons"]]
    elif "count" in scan:
        curves = random_hconvex_curves(
            args.seed, int(scan["count"]), n_nodes=n_nodes,
            max_mode=int(scan.get("max_mode", 4)),
            amplitude=float(scan.get("amplitude", 0.08)),
            min_margin=float(scan.get("min_margin", 0.01)))
        items = [(float(i), c) for i, c in enumerate(curves)]
    else:
        raise ConfigError("scan needs 'epsilons' or 'count'")
    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
        rows = list(pool.map(_scan_member, items))
    reports.write_rows(os.path.join(out, "scan.csv"),
                       ["param", "deficit", "dist", "ratio"], rows)


def cmd_quermass(cfg, out, args):
    qv = quermass_vector(_hyp_from_config(cfg))
    reports.write_json(os.path.join(out, "quermass.json"), qv.to_dict())


def cmd_rate_fit(cfg, out, args):
    curve = _curve_from_config(cfg, require_margin=STRICT_MARGIN)
    opts = _flow_options(cfg)
    trace = evolve(curve, opts)
    fitted, predicted = fit_decay_rate(trace)
    reports.write_json(os.path.join(out, "rate.json"), {
        "fitted": fitted, "predicted": predicted,
        "relative_error": abs(fitted - predicted) / predicted,
        "mode": dominant_mode(curve), "a_infinity": trace.a_infinity_predicted,
        "termination": trace.termination})


def cmd_ball_map(cfg, out, args):
    curve = _curve_from_config(cfg)
    write_ball_csv(os.path.join(out, "ball.csv"), map_curve(curve))
    reports.write_json(os.path.join(out, "ball.json"), {
        "convexity_margin": ball_convexity_margin(curve),
        "max_conformal_residual": float(np.max(np.abs(conformal_residual(curve))))})


HANDLERS = {"simulate": cmd_simulate, "verify": cmd_verify, "scan": cmd_scan,
            "quermass": cmd_quermass, "rate-fit": cmd_rate_fit, "ball-map": cmd_ball_map}


def build_parser():
    p = argparse.ArgumentParser(prog="hconvflow", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--seed", type=int, default=0, help="seed for random families")
    p.add_argument("--threads", type=int, default=1, help="workers for scan")
    return p


def execute(args) -> int:
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"error: config is not valid JSON: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if not isinstance(cfg, dict):
        print("error: config must be a JSON object", file=sys.stderr)
        return EXIT_INVALID
    try:
        os.makedirs(args.out, exist_ok=True)
        HANDLERS[args.command](cfg, args.out, args)
    except (AbortedMargin, NonFinite) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except (ConfigError, HConvFlowError, ValueError, TypeError, KeyError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main(argv=None) -> int:
    return execute(build_parser().parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
