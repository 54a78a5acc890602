"""Constant-order relaxation curves ``E_beta(-lam t**beta)``.

Two independent evaluators: the power series (small arguments only) and
inversion of the Laplace transform ``s**(beta-1) / (s**beta + lam)``.
"""

from __future__ import annotations

import math
from typing import Optional

import mpmath
import numpy as np

from .laplace_inversion import ContourSpec, invert

__all__ = ["SERIES_RANGE", "ml_series", "relaxation_transform", "relaxation_co"]

SERIES_RANGE = 5.0
MAX_LOST_DIGITS = 400


def ml_series(beta: float, z: float, tol: float = 1e-15) -> float:
    """One-parameter Mittag-Leffler function by its Taylor series.

    The alternating series loses about ``log10(e^|z|)`` digits to cancellation,
    so the sum is carried out in extended precision.
    """
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    if not math.isfinite(z):
        raise ValueError("z must be finite")
    if abs(z) > SERIES_RANGE:
        raise ValueError(f"series evaluation requires |z| <= {SERIES_RANGE}, got {z}")
    if tol < 1e-16:
        raise ValueError("tol below binary64 resolution")
    # Digits lost to cancellation equal the size of the largest term.
    ln_z = math.log(abs(z)) if z != 0 else -math.inf
    k_peak, peak = 0, 0.0
    k = 1
    while True:
        lt = k * ln_z - math.lgamma(beta * k + 1)
        if lt > peak:
            k_peak, peak = k, lt
        elif k > 2 * k_peak + 10:
            break
        k += 1
    lost = int(peak / math.log(10))
    if lost > MAX_LOST_DIGITS:
        raise ValueError(
            f"series for beta={beta}, z={z} cancels {lost} digits; use relaxation_co instead"
        )
    dps = 20 + lost + int(-math.log10(tol))
    with mpmath.workdps(dps):
        zz = mpmath.mpf(z)
        b = mpmath.mpf(beta)
        total = mpmath.mpf(0)
        k = 0
        while True:
            term = zz**k / mpmath.gamma(b * k + 1)
            total += term
            if k > k_peak and abs(term) < tol * 1e-3:
                break
            k += 1
        return float(total)


def relaxation_transform(alpha: float, lam: float):
    """Laplace transform of ``E_alpha(-lam t**alpha)`` as a vectorized callable."""

    def F(s):
        sa = np.exp(alpha * np.log(s))
        return sa / (s * (sa + lam))

    return F


def relaxation_co(
    alpha: float,
    lam: float,
    y0: float,
    ts,
    contour: Optional[ContourSpec] = None,
) -> np.ndarray:
    """``y0 * E_alpha(-lam t**alpha)`` by numerical Laplace inversion.

    ``t = 0`` returns ``y0`` exactly. ``alpha = 1`` is accepted.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam}")
    t = np.atleast_1d(np.asarray(ts, dtype=float))
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise ValueError("times must be finite and non-negative")
    out = np.full(t.shape, float(y0))
    pos = t > 0
    if np.any(pos):
        if alpha == 1.0:
            out[pos] = y0 * np.exp(-lam * t[pos])
        else:
            out[pos] = y0 * invert(relaxation_transform(alpha, lam), t[pos], contour)
    return out if np.ndim(ts) else out[0]
