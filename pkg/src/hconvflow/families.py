"""Seeded random families of strictly h-convex curves and hypersurfaces."""

from __future__ import annotations

from typing import List

import numpy as np

from .curve import CurveGrid, derive_fields, hconvexity_margin
from .quermass import AxisymmetricHypersurface, hyp_fields


def random_hconvex_curves(seed: int, count: int, n_nodes: int = 256, max_mode: int = 4,
                          amplitude: float = 0.08, min_margin: float = 0.01,
                          base_range=(0.5, 2.0), max_tries: int = 100000) -> List[CurveGrid]:
    """Random low-order Fourier profiles, rejected unless min kappa - 1 > min_margin.

    Mode k gets uniform cosine and sine amplitudes in [-amplitude/k^2, amplitude/k^2].
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(max_tries):
        if len(out) == count:
            break
        base = rng.uniform(*base_range)
        scale = amplitude / np.arange(1, max_mode + 1) ** 2
        a = rng.uniform(-scale, scale)
        b = rng.uniform(-scale, scale)
        modes = [(k + 1, a[k], b[k]) for k in range(max_mode)]
        try:
            curve = CurveGrid.from_modes(base, modes, n_nodes)
        except ValueError:
            continue
        if hconvexity_margin(derive_fields(curve)) > min_margin:
            out.append(curve)
    if len(out) < count:
        raise RuntimeError(f"only {len(out)} of {count} curves accepted")
    return out


def random_hconvex_hypersurfaces(seed: int, count: int, n: int = 2, m_nodes: int = 128,
                                 max_mode: int = 4, amplitude: float = 0.05,
                                 min_margin: float = 0.01, base_range=(0.5, 2.0),
                                 max_tries: int = 100000) -> List[AxisymmetricHypersurface]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(max_tries):
        if len(out) == count:
            break
        base = rng.uniform(*base_range)
        a = rng.uniform(-1.0, 1.0, max_mode) * amplitude / np.arange(1, max_mode + 1) ** 2
        try:
            hyp = AxisymmetricHypersurface.from_modes(
                n, base, [(k + 1, a[k]) for k in range(max_mode)], m_nodes)
        except ValueError:
            continue
        if hyp_fields(hyp).margin() > min_margin:
            out.append(hyp)
    if len(out) < count:
        raise RuntimeError(f"only {len(out)} of {count} hypersurfaces accepted")
    return out
