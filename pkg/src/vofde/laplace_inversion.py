"""Numerical inverse Laplace transform on deformed contours.

The Bromwich integral is deformed into a parabola or a hyperbola that opens
to the left and is discretized by the trapezoidal rule. Contour parameters
are optimized for a time window ``[t_min, t_max]``; when none is given the
requested times are split into half-decade windows, each with its own contour.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ContourError, ConvergenceWarning, InversionError
from .transition import OrderTransition, phi_hat, psi_hat

__all__ = [
    "ContourSpec",
    "Contour",
    "invert",
    "kernel_psi",
    "kernel_phi",
]

TransformFn = Callable[[np.ndarray], np.ndarray]

_SHAPES = ("parabolic", "hyperbolic")


@dataclass(frozen=True)
class ContourSpec:
    """Description of an integration contour.

    ``node_count`` is the total number of trapezoidal nodes, which is odd
    because the nodes are symmetric about the real axis. ``t_min``/``t_max``
    fix a single time window; leave them as ``None`` to split the times into
    half-decade windows.
    ``shift`` translates the contour to the right so that singularities with
    positive real part can be enclosed.
    """

    shape: str = "parabolic"
    node_count: int = 65
    t_min: Optional[float] = None
    t_max: Optional[float] = None
    shift: float = 0.0

    def __post_init__(self):
        if self.shape not in _SHAPES:
            raise ValueError(f"shape must be one of {_SHAPES}, got {self.shape!r}")
        if int(self.node_count) != self.node_count or self.node_count < 9 or self.node_count % 2 == 0:
            raise ValueError(f"node_count must be an odd integer >= 9, got {self.node_count}")
        if (self.t_min is None) != (self.t_max is None):
            raise ValueError("t_min and t_max must be given together")
        if self.t_min is not None:
            if not (0 < self.t_min <= self.t_max < math.inf):
                raise ValueError(f"need 0 < t_min <= t_max, got [{self.t_min}, {self.t_max}]")
        if not (math.isfinite(self.shift) and self.shift >= 0):
            raise ValueError(f"shift must be finite and non-negative, got {self.shift}")

    def with_nodes(self, node_count: int) -> "ContourSpec":
        return ContourSpec(self.shape, node_count, self.t_min, self.t_max, self.shift)

    def with_window(self, t_min: float, t_max: float) -> "ContourSpec":
        return ContourSpec(self.shape, self.node_count, t_min, t_max, self.shift)


@dataclass(frozen=True)
class Contour:
    """A concrete discretized contour: nodes ``z_k`` and weights ``dz_k``."""

    spec: ContourSpec
    mu: float
    step: float
    alpha: float  # hyperbola half-angle parameter; unused for parabolas

    @classmethod
    def for_window(cls, spec: ContourSpec) -> "Contour":
        if spec.t_min is None:
            raise ValueError("a concrete contour needs a time window")
        n = (spec.node_count - 1) // 2
        lam = spec.t_max / spec.t_min
        if spec.shape == "parabolic":
            # z = mu (1 + iu)^2; balance discretization against truncation.
            b = 2.0 * math.pi * n / math.sqrt(1.0 + 8.0 * lam)
            return cls(spec, mu=b / (8.0 * spec.t_max), step=2.0 * math.pi / b, alpha=0.0)

        def neg_rate(a):
            q = math.pi / 2 - a
            arg = (1.0 + lam * q / (2.0 * a - math.pi / 2)) / math.sin(a)
            return -2.0 * math.pi * n * q / math.acosh(arg)

        res = minimize_scalar(neg_rate, bounds=(math.pi / 4 + 1e-6, math.pi / 2 - 1e-6), method="bounded")
        a = float(res.x)
        b = -float(res.fun)
        q = math.pi / 2 - a
        return cls(spec, mu=b * (2.0 * a - math.pi / 2) / (q * spec.t_max), step=2.0 * math.pi * q / b, alpha=a)

    @property
    def u(self) -> np.ndarray:
        n = (self.spec.node_count - 1) // 2
        return self.step * np.arange(-n, n + 1)

    def z(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.spec.shape == "parabolic":
            z = self.mu * (1.0 + 1j * u) ** 2
        else:
            z = self.mu * (1.0 + np.sin(1j * u - self.alpha))
        return z + self.spec.shift

    def dz(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.spec.shape == "parabolic":
            return 2j * self.mu * (1.0 + 1j * u)
        return 1j * self.mu * np.cos(1j * u - self.alpha)

    def encloses(self, point: complex) -> bool:
        """True when ``point`` lies strictly to the left of the contour."""
        x, y = point.real - self.spec.shift, point.imag
        if self.spec.shape == "parabolic":
            # Re z = mu - (Im z)^2 / (4 mu) on the parabola.
            return x < self.mu - y * y / (4.0 * self.mu)
        sa, ca = math.sin(self.alpha), math.cos(self.alpha)
        # Re z = mu (1 - sin(a) cosh u), Im z = mu cos(a) sinh u.
        u = math.asinh(y / (self.mu * ca))
        return x < self.mu * (1.0 - sa * math.cosh(u))


def _evaluate(F: TransformFn, z: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(F(z), dtype=complex)
        if vals.shape != z.shape:
            raise ValueError
    except (TypeError, ValueError):
        vals = np.array([complex(F(zk)) for zk in z.ravel()]).reshape(z.shape)
    return vals


# Sub-windows per decade. A 65-node parabola spanning a full decade stalls
# near 1e-7; two sub-windows bring it to round-off level.
WINDOWS_PER_DECADE = 2


def _decade_windows(ts: np.ndarray, per_decade: int = WINDOWS_PER_DECADE):
    edges = np.floor(per_decade * np.log10(ts) + 1e-9).astype(int)
    windows = []
    for k in np.unique(edges):
        idx = np.nonzero(edges == k)[0]
        windows.append((10.0 ** (k / per_decade), 10.0 ** ((k + 1) / per_decade), idx))
    return windows


def _invert_window(F: TransformFn, ts: np.ndarray, spec: ContourSpec) -> tuple[np.ndarray, np.ndarray]:
    contour = Contour.for_window(spec)
    u = contour.u
    z = contour.z(u)
    weights = _evaluate(F, z) * contour.dz(u) * contour.step / (2j * math.pi)
    if not np.all(np.isfinite(weights)):
        raise InversionError("transform returned non-finite values on the contour")
    vals = np.exp(np.outer(ts, z)) @ weights
    return vals.real, vals.imag


def _windows_for(ts: np.ndarray, spec: ContourSpec):
    if spec.t_min is not None:
        lo, hi = spec.t_min * (1 - 1e-12), spec.t_max * (1 + 1e-12)
        if ts.min() < lo or ts.max() > hi:
            raise ValueError(f"times must lie in [{spec.t_min}, {spec.t_max}]")
        return [(spec, np.arange(ts.size))]
    return [(spec.with_window(a, b), idx) for a, b, idx in _decade_windows(ts)]


def invert(
    F: TransformFn,
    ts,
    contour: Optional[ContourSpec] = None,
    singularities: Iterable[complex] = (),
    check: bool = True,
) -> np.ndarray:
    """Approximate ``f(t)`` from its Laplace transform ``F``.

    Parameters
    ----------
    F : callable
        Vectorized evaluator ``s -> F(s)``; scalar callables are accepted too.
    ts : array_like
        Positive times.
    contour : ContourSpec, optional
        Defaults to a 65-node parabola, two windows per decade.
    singularities : iterable of complex
        Known singularities of ``F`` off the negative real axis. Each must lie
        to the left of every contour used, otherwise ``ContourError``.
    check : bool
        Repeat with twice the nodes and warn when the two results disagree
        by more than ``1e-8 (1 + |f|)``.
    """
    spec = contour or ContourSpec()
    t_arr = np.atleast_1d(np.asarray(ts, dtype=float))
    if t_arr.size == 0:
        return np.empty(0)
    if not np.all(np.isfinite(t_arr)) or np.any(t_arr <= 0):
        raise ValueError("times must be positive and finite")
    sing = [complex(p) for p in singularities]
    out = np.empty(t_arr.size)
    for wspec, idx in _windows_for(t_arr, spec):
        c = Contour.for_window(wspec)
        for p in sing:
            if not c.encloses(p):
                raise ContourError(
                    f"singularity {p:.6g} lies right of the contour for window "
                    f"[{wspec.t_min:g}, {wspec.t_max:g}]; increase the shift"
                )
        re, im = _invert_window(F, t_arr[idx], wspec)
        if np.any(np.abs(im) >= 1e-8 * (1.0 + np.abs(re))):
            raise InversionError(f"imaginary residue {np.abs(im).max():.3g} too large")
        if check:
            fine = wspec.with_nodes(2 * wspec.node_count - 1)
            re2, _ = _invert_window(F, t_arr[idx], fine)
            diff = np.abs(re2 - re) / (1.0 + np.abs(re2))
            if np.any(diff > 1e-8):
                warnings.warn(
                    f"inversion not converged on [{wspec.t_min:g}, {wspec.t_max:g}]: "
                    f"node doubling changed results by {diff.max():.2e} relative",
                    ConvergenceWarning,
                    stacklevel=2,
                )
        out[idx] = re
    return out.reshape(np.shape(ts)) if np.ndim(ts) else out[0]


def kernel_psi(tr: OrderTransition, ts, contour: Optional[ContourSpec] = None, check: bool = True):
    """Time-domain integral kernel ``psi(t)``, the inverse transform of ``psi_hat``."""
    return invert(lambda s: psi_hat(tr, s), ts, contour, check=check)


def kernel_phi(tr: OrderTransition, ts, contour: Optional[ContourSpec] = None, check: bool = True):
    """Time-domain derivative kernel ``phi(t)``, the inverse transform of ``phi_hat``."""
    return invert(lambda s: phi_hat(tr, s), ts, contour, check=check)
