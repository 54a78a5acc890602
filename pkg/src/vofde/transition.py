"""Order-transition functions and the Laplace-domain kernels they induce.

The variable-order kernels are known only through their Laplace transforms

    Psi(s) = s**(-s*A(s)),    Phi(s) = s**(s*A(s) - 1),

where ``A`` is the Laplace transform of the order function ``alpha(t)``.
Powers use the principal logarithm, so the negative real axis (including
the origin) is the branch cut and evaluation there is rejected.

All functions accept Python scalars or numpy arrays and return numpy values
of matching shape. Complex points are plain ``complex`` / ``complex128``.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import BranchCutError, PoleError

__all__ = [
    "OrderTransition",
    "ExponentialTransition",
    "order_at",
    "laplace_order",
    "s_alpha_product",
    "psi_hat",
    "phi_hat",
    "psi_hat_h",
    "MagnitudeDecomposition",
    "magnitude_decomposition",
    "circle_bound",
]


class OrderTransition(abc.ABC):
    """A fractional order ``alpha(t)`` with a closed-form Laplace transform."""

    @abc.abstractmethod
    def order_at(self, t):
        """Order ``alpha(t)`` for ``t >= 0``."""

    @abc.abstractmethod
    def laplace_order(self, s):
        """Laplace transform ``A(s)`` of the order function."""

    def s_alpha_product(self, s):
        """The exponent ``s*A(s)`` of the kernel transforms."""
        s = np.asarray(s, dtype=complex)
        return s * self.laplace_order(s)

    @property
    def initial_order(self) -> float:
        return float(self.order_at(0.0))


@dataclass(frozen=True)
class ExponentialTransition(OrderTransition):
    """Exponential transition ``alpha(t) = alpha2 + (alpha1 - alpha2) exp(-c t)``.

    Parameters
    ----------
    alpha1 : float
        Order at ``t = 0``, in (0, 1).
    alpha2 : float
        Limiting order as ``t -> inf``, in (0, 1).
    c : float
        Transition rate (1/time), positive.

    ``alpha1 == alpha2`` is allowed and reproduces the constant-order case.
    """

    alpha1: float
    alpha2: float
    c: float

    def __post_init__(self):
        for name in ("alpha1", "alpha2", "c"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if not 0.0 < self.alpha1 < 1.0:
            raise ValueError(f"alpha1 must lie in (0, 1), got {self.alpha1}")
        if not 0.0 < self.alpha2 < 1.0:
            raise ValueError(f"alpha2 must lie in (0, 1), got {self.alpha2}")
        if not self.c > 0.0:
            raise ValueError(f"c must be positive, got {self.c}")

    @property
    def is_constant(self) -> bool:
        return self.alpha1 == self.alpha2

    def order_at(self, t):
        t = np.asarray(t, dtype=float)
        if not np.all(np.isfinite(t)):
            raise ValueError("time must be finite")
        if np.any(t < 0):
            raise ValueError("time must be non-negative")
        out = self.alpha2 + (self.alpha1 - self.alpha2) * np.exp(-self.c * t)
        return out[()] if out.ndim == 0 else out

    def laplace_order(self, s):
        s = np.asarray(s, dtype=complex)
        if np.any(s == 0) or np.any(s == -self.c):
            raise PoleError("A(s) has poles at s = 0 and s = -c")
        out = (self.alpha2 * self.c + self.alpha1 * s) / (s * (self.c + s))
        return out[()] if out.ndim == 0 else out

    def b_part(self, s):
        """``B(s) = (alpha2 - alpha1) c / (c + s)``, so that ``sA(s) = alpha1 + B(s)``."""
        s = np.asarray(s, dtype=complex)
        return (self.alpha2 - self.alpha1) * self.c / (self.c + s)

    def c_part(self, s):
        """``C(s) = (alpha1 - alpha2) s / (c + s)``, so that ``sA(s) = alpha2 + C(s)``."""
        s = np.asarray(s, dtype=complex)
        return (self.alpha1 - self.alpha2) * s / (self.c + s)

    def s_alpha_product(self, s):
        s = np.asarray(s, dtype=complex)
        if np.any(s == -self.c):
            raise PoleError("sA(s) has a pole at s = -c")
        # Each decomposed form is free of cancellation on its side of |s| = c.
        with np.errstate(invalid="ignore", over="ignore"):
            large = np.abs(s) >= self.c
            out = np.where(large, self.alpha1 + self.b_part(s), self.alpha2 + self.c_part(s))
        return out[()] if out.ndim == 0 else out


def order_at(tr: OrderTransition, t):
    return tr.order_at(t)


def laplace_order(tr: OrderTransition, s):
    return tr.laplace_order(s)


def s_alpha_product(tr: OrderTransition, s):
    return tr.s_alpha_product(s)


def _check_off_cut(s):
    s = np.asarray(s, dtype=complex)
    if not np.all(np.isfinite(s)):
        raise ValueError("argument must be finite")
    if np.any((s.imag == 0) & (s.real <= 0)):
        raise BranchCutError("argument lies on the branch cut (-inf, 0]")
    return s


def psi_hat(tr: OrderTransition, s):
    """Laplace transform ``s**(-sA(s))`` of the variable-order integral kernel."""
    s = _check_off_cut(s)
    out = np.exp(-tr.s_alpha_product(s) * np.log(s))
    return out[()] if out.ndim == 0 else out


def phi_hat(tr: OrderTransition, s):
    """Laplace transform ``s**(sA(s) - 1)`` of the variable-order derivative kernel."""
    s = _check_off_cut(s)
    out = np.exp((tr.s_alpha_product(s) - 1.0) * np.log(s))
    return out[()] if out.ndim == 0 else out


def _check_xi(xi):
    xi = np.asarray(xi, dtype=complex)
    if not np.all(np.isfinite(xi)):
        raise ValueError("argument must be finite")
    if np.any((xi.imag == 0) & (xi.real >= 1)):
        raise BranchCutError("xi lies on the branch cut [1, inf)")
    return xi


def _exponent_h(tr: ExponentialTransition, h, xi):
    # sA(s) at s = (1 - xi)/h, written without forming s.
    one_m = 1.0 - xi
    ch = tr.c * h
    return (tr.alpha2 * ch + tr.alpha1 * one_m) / (ch + one_m)


def psi_hat_h(tr: OrderTransition, h: float, xi):
    """Generating function ``Psi((1 - xi)/h)`` of the backward-Euler convolution weights.

    Analytic in the whole plane except on the real half-line ``[1, inf)``.
    """
    if not h > 0:
        raise ValueError(f"step must be positive, got {h}")
    xi = _check_xi(xi)
    log_s = np.log1p(-xi) - np.log(h)
    if isinstance(tr, ExponentialTransition):
        expo = _exponent_h(tr, h, xi)
    else:
        expo = tr.s_alpha_product((1.0 - xi) / h)
    out = np.exp(-expo * log_s)
    return out[()] if out.ndim == 0 else out


class MagnitudeDecomposition(NamedTuple):
    Axy: np.ndarray
    Bxy: np.ndarray
    theta: np.ndarray
    magnitude: np.ndarray


def magnitude_decomposition(tr: ExponentialTransition, h: float, xi) -> MagnitudeDecomposition:
    """Real-arithmetic form of ``|Psi((1 - xi)/h)|``.

    With ``xi = x + iy``, the exponent ``sA(s)`` equals ``A(x, y) + i B(x, y)``
    and the modulus is
    ``exp(A (ln h - ln|1 - xi|) + arg(1 - xi) B)``.
    """
    xi = _check_xi(xi)
    x, y = xi.real, xi.imag
    ch = tr.c * h
    a1, a2 = tr.alpha1, tr.alpha2
    den = (ch + (1.0 - x)) ** 2 + y**2
    Axy = (a1 * y**2 + (ch + (1.0 - x)) * (a1 * (1.0 - x) + a2 * ch)) / den
    Bxy = (a2 - a1) * ch * y / den
    theta = np.angle(1.0 - xi)
    mag = np.exp(Axy * (np.log(h) - 0.5 * np.log((1.0 - x) ** 2 + y**2)) + theta * Bxy)
    if mag.ndim == 0:
        return MagnitudeDecomposition(Axy[()], Bxy[()], theta[()], mag[()])
    return MagnitudeDecomposition(Axy, Bxy, theta, mag)


def circle_bound(tr: ExponentialTransition, h: float, r: float) -> float:
    """``|Psi((1 - r)/h)|``, which dominates ``|Psi((1 - z)/h)|`` on every ``|z| <= r``.

    The bound is guaranteed only for ``0 < h < 1 - r``.
    """
    if not 0.0 < r < 1.0:
        raise ValueError(f"radius must lie in (0, 1), got {r}")
    if not 0.0 < h < 1.0 - r:
        raise ValueError(f"circle bound requires 0 < h < 1 - r (h={h}, r={r})")
    return float(abs(psi_hat_h(tr, h, r)))
