"""Fourier differentiation and quadrature on uniform periodic grids."""

import numpy as np


def wavenumbers(n):
    """Integer wavenumbers of a real FFT of length ``n``."""
    return np.arange(n // 2 + 1, dtype=float)


def derivatives(f):
    """First and second derivatives of periodic samples on [0, 2*pi).

    The grid is assumed uniform with ``len(f)`` (even) points. The Nyquist
    mode is dropped for the first derivative and kept for the second, which
    makes both exact for the trigonometric interpolant.
    """
    f = np.asarray(f, dtype=float)
    n = f.shape[-1]
    # derivatives are shift invariant; removing f[0] makes constants exact
    fh = np.fft.rfft(f - f[..., :1], axis=-1)
    k = wavenumbers(n)
    d1 = 1j * k * fh
    d1[..., -1] = 0.0
    d2 = -(k * k) * fh
    return np.fft.irfft(d1, n, axis=-1), np.fft.irfft(d2, n, axis=-1)


def trapezoid(f):
    """Periodic trapezoid rule for the integral of ``f`` over one period."""
    f = np.asarray(f, dtype=float)
    return 2.0 * np.pi * np.mean(f, axis=-1)


def fourier_modes(f):
    """Coefficients c_k (k = 0..n/2) with f = Re sum_k c_k e^{ik theta}."""
    f = np.asarray(f, dtype=float)
    n = f.shape[-1]
    c = np.fft.rfft(f) / n
    c[1:-1] *= 2.0
    return c
