"""Normalized elementary symmetric functions of curvature vectors.

E_k(x) = binom(n, k)^{-1} * sum over k-subsets of products, with E_0 = 1.
Every function accepts a single vector or a stack of vectors (last axis = n).
"""

from math import comb

import numpy as np

from .errors import DomainError, NotInCone


def _sigma(x):
    """Unnormalised elementary symmetric polynomials sigma_0..sigma_n."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    e = np.zeros(x.shape[:-1] + (n + 1,))
    e[..., 0] = 1.0
    for i in range(n):
        xi = x[..., i, None]
        # descending update keeps sigma_{j-1} from the previous row
        e[..., 1:i + 2] = e[..., 1:i + 2] + xi * e[..., 0:i + 1]
    return e


def _binoms(n):
    return np.array([comb(n, k) for k in range(n + 1)], dtype=float)


def elem_sym(values):
    """(E_0, ..., E_n) by the one-pass triangle recurrence."""
    x = np.asarray(values, dtype=float)
    if x.shape[-1] < 1:
        raise DomainError("need at least one entry")
    return _sigma(x) / _binoms(x.shape[-1])


def _check_k(n, k, lo=1):
    if not lo <= k <= n:
        raise DomainError(f"k={k} outside [{lo}, {n}]")


def elem_sym_gradient(values, k):
    """Diagonal derivative dE_k/dx_i for every i.

    Each entry is sigma_{k-1} of the vector with x_i removed, divided by
    binom(n, k). The deflated recurrence is recomputed per index instead of
    dividing, so small or repeated entries cause no cancellation.
    """
    x = np.asarray(values, dtype=float)
    n = x.shape[-1]
    _check_k(n, k)
    grad = np.empty_like(x)
    for i in range(n):
        rest = np.delete(x, i, axis=-1)
        if n == 1:
            grad[..., i] = 1.0
        else:
            grad[..., i] = _sigma(rest)[..., k - 1]
    return grad / comb(n, k)


def contraction_identities(values, k):
    """Residuals of the three trace identities for dE_k:

        sum_i dE_k^i           - k E_{k-1}
        sum_i dE_k^i x_i       - k E_k
        sum_i dE_k^i x_i^2     - (n E_1 E_k - (n - k) E_{k+1})
    """
    x = np.asarray(values, dtype=float)
    n = x.shape[-1]
    _check_k(n, k)
    e = elem_sym(x)
    ek1 = e[..., k + 1] if k < n else 0.0
    g = elem_sym_gradient(x, k)
    r1 = g.sum(axis=-1) - k * e[..., k - 1]
    r2 = (g * x).sum(axis=-1) - k * e[..., k]
    r3 = (g * x * x).sum(axis=-1) - (n * e[..., 1] * e[..., k] - (n - k) * ek1)
    return r1, r2, r3


def in_garding_cone(values, k):
    """True iff E_1, ..., E_k are all strictly positive."""
    x = np.asarray(values, dtype=float)
    _check_k(x.shape[-1], k)
    return np.all(elem_sym(x)[..., 1:k + 1] > 0.0, axis=-1)


def newton_maclaurin_gap(values, k, l):
    """E_l E_k - E_{k+1} E_{l-1}, non-negative inside the cone Gamma_k.

    Raises
    ------
    NotInCone
        If some vector lies outside Gamma_k (the inequality is not
        guaranteed there).
    """
    x = np.asarray(values, dtype=float)
    n = x.shape[-1]
    if not (1 <= l <= k and k + 1 <= n):
        raise DomainError(f"need 1 <= l <= k <= n - 1, got k={k}, l={l}, n={n}")
    if not np.all(in_garding_cone(x, k)):
        raise NotInCone(f"curvature vector outside Gamma_{k}")
    e = elem_sym(x)
    return e[..., l] * e[..., k] - e[..., k + 1] * e[..., l - 1]
