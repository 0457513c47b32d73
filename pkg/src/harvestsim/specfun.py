"""Numerically stable elementary and special functions used by every integrand.

All functions are pure, accept scalars or numpy arrays, and reject
non-finite input eagerly.  Conventions:

* ``sinc`` is unnormalized, sinc(x) = sin(x)/x, because the Fourier
  transform of a unit rectangle is sinc(omega/2) in that convention.
* ``ediff`` is the regular difference quotient of complex exponentials,
  the building block of every rectangular-window time integral.
"""
from __future__ import annotations

import numpy as np
from scipy.special import wofz

__all__ = ["sinc", "ediff", "faddeeva_w", "damped_im_erfi"]

# Below this the 7th-order Taylor series of sin(x)/x is exact to < 1e-18.
_SINC_TAYLOR_CUT = 1e-2


def _check_finite(name, *values):
    for v in values:
        if not np.all(np.isfinite(v)):
            raise ValueError(f"{name}: non-finite input")


def sinc(x):
    """Unnormalized sinc, sin(x)/x, with the removable singularity filled.

    Accepts scalars or arrays; total on finite input.
    """
    x = np.asarray(x, dtype=float)
    _check_finite("sinc", x)
    small = np.abs(x) < _SINC_TAYLOR_CUT
    x2 = x * x
    taylor = 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0))
    # avoid 0/0 in the masked-out branch
    safe = np.where(small, 1.0, x)
    out = np.where(small, taylor, np.sin(safe) / safe)
    return float(out) if out.ndim == 0 else out


def ediff(a, b, mu):
    """(exp(i*mu*b) - exp(i*mu*a)) / mu, regular at mu = 0.

    Evaluated as i*(b-a) * exp(i*mu*(a+b)/2) * sinc(mu*(b-a)/2), which is
    entire in mu.  Requires a <= b; ``mu`` may be an array.
    """
    _check_finite("ediff", a, b, mu)
    if not np.all(a <= b):
        raise ValueError("ediff: requires a <= b")
    mu = np.asarray(mu, dtype=float)
    half = 0.5 * (b - a)
    out = 1j * (b - a) * np.exp(1j * mu * 0.5 * (a + b)) * sinc(mu * half)
    return complex(out) if out.ndim == 0 else out


def faddeeva_w(z):
    """Faddeeva function w(z) = exp(-z^2)*erfc(-iz) on the closed upper half-plane.

    Relative error <= 1e-12 over the domain; |w(z)| <= 1 is enforced
    (the mathematical bound can be overshot by a rounding ulp).
    Raises on Im z < 0.
    """
    z = np.asarray(z, dtype=complex)
    _check_finite("faddeeva_w", z.real, z.imag)
    if np.any(z.imag < 0.0):
        raise ValueError("faddeeva_w: requires Im z >= 0")
    w = wofz(z)
    mag = np.abs(w)
    w = np.where(mag > 1.0, w / np.where(mag > 1.0, mag, 1.0), w)
    return complex(w) if w.ndim == 0 else w


def damped_im_erfi(x, y):
    """exp(-x^2) * Im[Erfi(x + i*y)] without overflow, for x, y >= 0.

    Uses the identity
        exp(-x^2)*Erfi(x+iy) = -i*w(x+iy)*exp(-y^2)*exp(2ixy) + i*exp(-x^2),
    every factor of which is bounded on the domain, so the imaginary part is

        exp(-x^2) - exp(-y^2) * Re[w(x+iy) * exp(2ixy)].
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_finite("damped_im_erfi", x, y)
    if np.any(x < 0.0) or np.any(y < 0.0):
        raise ValueError("damped_im_erfi: requires x >= 0 and y >= 0")
    w = faddeeva_w(x + 1j * y)
    out = np.exp(-x * x) - np.exp(-y * y) * np.real(w * np.exp(2j * x * y))
    return float(out) if out.ndim == 0 else out
