"""Complex log-Gamma and digamma with vertical branch cuts.

``log_gamma`` is analytic on the plane cut along the upward rays
``{-n + i y : n = 0, 1, 2, ..., y >= 0}``. This is the sheet on which the
cavity kernel is continued from the reference region around the positive
imaginary ``x`` axis down to the real axis. It coincides with the principal
branch for ``Re z > 0``. Plain logarithms that accompany it use
:func:`ln_up`, whose cut is the positive imaginary axis.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .errors import BranchCutError, ValidationError

EULER_GAMMA = 0.5772156649015329
CUT_TOL = 1e-12
_SHIFT = 12.0
# B_2k for k = 1..10
_BERNOULLI = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _vectorize(fn):
    vec = np.vectorize(fn, otypes=[complex])

    def wrapper(z):
        if np.ndim(z) == 0:
            return fn(complex(z))
        return vec(np.asarray(z, dtype=complex))

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _ln_up(w: complex) -> complex:
    """Logarithm with its cut on the positive imaginary axis.

    ``arg`` lies in ``(-3 pi / 2, pi / 2]``, so the function is continuous
    across the negative real axis and equals the principal log for
    ``Re w > 0``.
    """
    if w == 0:
        raise BranchCutError("logarithm of zero")
    a = math.atan2(w.imag, w.real)
    if a > 0.5 * math.pi:
        a -= 2.0 * math.pi
    return complex(math.log(abs(w)), a)


ln_up = _vectorize(_ln_up)


def distance_to_cuts(z: complex) -> float:
    """Distance from ``z`` to the nearest ray ``-n + i y`` (``n >= 0``, ``y >= 0``)."""
    n = max(0.0, float(round(-z.real)))
    if z.imag >= 0:
        return abs(z.real + n)
    return abs(complex(z.real + n, z.imag))


def _log_gamma(z: complex) -> complex:
    """Log-Gamma continuous off the upward rays at the nonpositive integers.

    Equals the principal ``log Gamma`` for ``Re z > 0``. Computed from
    Stirling's series after shifting ``Re z`` above 12 and unwinding the
    recurrence with :func:`ln_up`.

    Examples
    --------
    >>> abs(log_gamma(1.0)) < 1e-14
    True
    """
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValidationError("log_gamma argument must be finite")
    if distance_to_cuts(z) <= CUT_TOL:
        raise BranchCutError(f"log_gamma evaluated on a branch cut at z={z}")
    shift = max(0, math.ceil(_SHIFT - z.real))
    w = z + shift
    inv = 1.0 / w
    inv2 = inv * inv
    series = 0.0
    power = inv
    for k, b in enumerate(_BERNOULLI, start=1):
        series += b / (2 * k * (2 * k - 1)) * power
        power *= inv2
    out = (w - 0.5) * cmath.log(w) - w + _HALF_LOG_2PI + series
    for k in range(shift):
        out -= _ln_up(z + k)
    return out


log_gamma = _vectorize(_log_gamma)


def _digamma(z: complex) -> complex:
    """Logarithmic derivative of Gamma; single-valued, poles at ``0, -1, ...``."""
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValidationError("digamma argument must be finite")
    n = round(-z.real)
    if n >= 0 and abs(z + n) <= CUT_TOL:
        raise BranchCutError(f"digamma pole at z={z}")
    shift = max(0, math.ceil(_SHIFT - z.real))
    w = z + shift
    inv2 = 1.0 / (w * w)
    series = 0.0
    power = inv2
    for k, b in enumerate(_BERNOULLI, start=1):
        series += b / (2 * k) * power
        power *= inv2
    out = cmath.log(w) - 0.5 / w - series
    for k in range(shift):
        out -= 1.0 / (z + k)
    return out


digamma = _vectorize(_digamma)


def cauchy_derivative(f, z: complex, radius: float, points: int = 32) -> complex:
    """Derivative of an analytic ``f`` from a trapezoidal Cauchy integral.

    Spectrally accurate when the disc of the given radius avoids every
    singularity and cut of ``f``.
    """
    theta = 2.0 * np.pi * np.arange(points) / points
    nodes = np.exp(1j * theta)
    vals = np.array([f(z + radius * s) for s in nodes])
    return complex(np.mean(vals / nodes) / radius)


