"""Convolution-quadrature weights for the variable-order Grünwald–Letnikov scheme.

The weights are the Taylor coefficients of ``Psi((1 - xi)/h)`` at ``xi = 0``.
They are computed from the Cauchy integral on the circle ``|xi| = rho``,
discretized by the trapezoidal rule on ``L`` nodes, which is one FFT.

The circle radius trades two errors. Aliasing from the truncated trapezoidal
rule decays like ``(rho/r)**L``. Round-off in the FFT is amplified by
``rho**-n``. The planner chooses ``rho`` so that the round-off on the last
weight meets ``safety * tau``, then picks the smallest power-of-two ``L`` that
pushes aliasing below ``tau``.
"""

from __future__ import annotations

import functools
import hashlib
import math
import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import InfeasiblePlanError, PlanWarning
from .transition import ExponentialTransition, psi_hat_h

__all__ = [
    "EPS",
    "MAX_NODES",
    "WeightPlan",
    "WeightTable",
    "StoredWeights",
    "select_radius",
    "estimate_M",
    "select_node_count",
    "error_bound",
    "roundoff_estimate",
    "plan_weights",
    "compute_weights",
    "co_weights",
    "dump_table",
    "load_table",
]

EPS = float(np.finfo(float).eps)
MAX_NODES = 2**26
DEFAULT_TAU = 1e-13
DEFAULT_SAFETY = 0.1
DEFAULT_R = 0.99
CIRCLE_SAMPLES = 4096


@dataclass(frozen=True)
class WeightPlan:
    """Parameters of one weight computation.

    ``M_r`` is ``|Psi^[h](r)|``, which bounds the generating function on the
    disc of radius ``r`` whenever ``h < 1 - r``. ``M_estimate`` is the sampled
    maximum on the circle ``|xi| = r`` and is what the bounds actually use.
    ``relaxed`` marks plans where the requested ``tau`` was unreachable and
    ``tau_effective`` reports the accuracy that is reachable.
    """

    h: float
    N: int
    tau: float
    safety: float
    r: float
    rho: float
    L: int
    eps: float
    M_r: float
    M_estimate: float
    relaxed: bool = False
    tau_effective: float = math.nan

    @property
    def circle_bound_applies(self) -> bool:
        return self.h < 1.0 - self.r

    @property
    def predicted_error(self) -> float:
        return error_bound(self.M_estimate, self.rho, self.r, self.L, self.N)


@dataclass(frozen=True, eq=False)
class WeightTable:
    """Weights ``omega_0 .. omega_N`` with per-index error estimates.

    ``discretization_bound[n]`` is the trapezoidal-rule bound. ``error_bound[n]``
    adds a model of FFT round-off amplified by ``rho**-n``; compare against it.
    """

    transition: ExponentialTransition
    plan: WeightPlan
    omegas: np.ndarray
    discretization_bound: np.ndarray
    error_bound: np.ndarray
    imag_residue: float
    checksum: str = field(init=False)

    def __post_init__(self):
        for name in ("omegas", "discretization_bound", "error_bound"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "checksum", hashlib.sha256(self.omegas.tobytes()).hexdigest()[:16])

    @property
    def h(self) -> float:
        return self.plan.h

    @property
    def N(self) -> int:
        return self.plan.N

    def __len__(self) -> int:
        return self.omegas.size


def select_radius(N: int, tau: float, F_s: float, M_r: float, eps: float = EPS) -> float:
    """Contour radius that keeps the round-off on ``omega_N`` near ``F_s * tau``.

    The returned value may be ``>= 1``; the caller then has to enlarge ``r``
    or give up on ``tau``.
    """
    if N < 0:
        raise ValueError("N must be non-negative")
    for name, v in (("tau", tau), ("F_s", F_s), ("M_r", M_r), ("eps", eps)):
        if not (v > 0 and math.isfinite(v)):
            raise ValueError(f"{name} must be positive and finite, got {v}")
    return math.exp(-math.log(F_s * tau / (M_r * eps)) / max(N, 1))


def _circle_max(tr, h, radius, samples):
    theta = 2.0 * np.pi * np.arange(samples) / samples
    return float(np.abs(psi_hat_h(tr, h, radius * np.exp(1j * theta))).max())


def estimate_M(
    tr: ExponentialTransition,
    h: float,
    r: float,
    rho: Optional[float] = None,
    samples: int = CIRCLE_SAMPLES,
    mode: str = "circle",
) -> float:
    """Maximum of ``|Psi^[h]|`` on the closed disc of radius ``r``.

    ``mode="circle"`` samples the boundary ``|xi| = r`` only, which suffices by
    the maximum-modulus principle. ``mode="strip"`` also samples the annulus
    ``rho <= |xi| <= r`` and is meant for verification.
    """
    if not 0.0 < r < 1.0:
        raise ValueError(f"r must lie in (0, 1), got {r}")
    if samples < 1:
        raise ValueError("samples must be positive")
    if mode == "circle":
        return _circle_max(tr, h, r, samples)
    if mode != "strip":
        raise ValueError(f"unknown mode {mode!r}")
    if rho is None or not 0.0 < rho < r:
        raise ValueError("strip mode needs 0 < rho < r")
    radii = rho * np.exp(np.linspace(0.0, math.log(r / rho), 16))
    return max(_circle_max(tr, h, rad, samples) for rad in radii)


def select_node_count(M: float, rho: float, r: float, tau: float, N: int) -> int:
    """Smallest power of two ``L >= N + 1`` whose aliasing bound on ``omega_N`` is below ``tau``."""
    if not 0.0 < rho < r:
        raise ValueError(f"need 0 < rho < r, got rho={rho}, r={r}")
    log_num = np.logaddexp(math.log(M) - N * math.log(rho), math.log(tau))
    need = (log_num - math.log(tau)) / (math.log(r) - math.log(rho))
    L = max(N + 1, math.ceil(need), 1)
    L = 1 << (L - 1).bit_length()
    if L > MAX_NODES:
        raise InfeasiblePlanError(f"plan needs {L} nodes, above the cap of {MAX_NODES}")
    return L


def error_bound(M: float, rho: float, r: float, L: int, n) -> np.ndarray | float:
    """Aliasing bound ``M rho**-n / ((r/rho)**L - 1)`` for the trapezoidal Taylor coefficient."""
    if not 0.0 < rho < r:
        raise ValueError(f"need 0 < rho < r, got rho={rho}, r={r}")
    if L <= 0:
        raise ValueError("L must be positive")
    x = L * math.log(r / rho)
    # log(expm1(x)) without overflow for huge L
    log_denom = math.log(math.expm1(x)) if x < 30.0 else x + math.log1p(-math.exp(-x))
    n = np.asarray(n, dtype=float)
    out = np.exp(math.log(M) - n * math.log(rho) - log_denom)
    return out[()] if out.ndim == 0 else out


def roundoff_estimate(M_rho: float, rho: float, L: int, n, eps: float = EPS):
    """FFT round-off model ``eps (1 + log2 L) M_rho rho**-n``."""
    n = np.asarray(n, dtype=float)
    out = eps * (1.0 + math.log2(L)) * M_rho * np.exp(-n * math.log(rho))
    return out[()] if out.ndim == 0 else out


def _relaxed_radius(tr, h, N, samples):
    # Minimize round-off on omega_N, eps * M_rho * rho**-N, over the radius.
    def cost(x):
        rho = 1.0 - math.exp(x)
        return math.log(_circle_max(tr, h, rho, samples)) - N * math.log(rho)

    res = minimize_scalar(cost, bounds=(math.log(1e-2 / max(N, 1)), math.log(0.5)), method="bounded")
    return 1.0 - math.exp(float(res.x))


def plan_weights(
    tr: ExponentialTransition,
    h: float,
    N: int,
    tau: float = DEFAULT_TAU,
    F_s: float = DEFAULT_SAFETY,
    eps: float = EPS,
    r: float = DEFAULT_R,
    samples: int = CIRCLE_SAMPLES,
) -> WeightPlan:
    """Choose ``r``, ``rho`` and ``L`` for the weights ``omega_0 .. omega_N``.

    Starting from ``r``, the outer radius is moved halfway toward 1 until the
    radius rule gives ``rho < r``. When the generating function grows too fast
    near ``xi = 1`` for any ``r < 1`` to work, ``rho`` instead minimizes the
    round-off on ``omega_N`` and the plan is marked relaxed with a
    ``PlanWarning``.
    """
    if not h > 0 or not math.isfinite(h):
        raise ValueError(f"h must be positive and finite, got {h}")
    if int(N) != N or N < 0:
        raise ValueError(f"N must be a non-negative integer, got {N}")
    if not 0.0 < F_s < 1.0:
        raise ValueError(f"F_s must lie in (0, 1), got {F_s}")
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if not 0.0 < r < 1.0:
        raise ValueError(f"r must lie in (0, 1), got {r}")
    N = int(N)
    relaxed = False
    rho = math.inf
    for _ in range(60):
        M = _circle_max(tr, h, r, samples)
        rho = select_radius(N, tau, F_s, M, eps)
        if rho < r or 1.0 - r < 1e-12:
            break
        r = 1.0 - 0.5 * (1.0 - r)
    if not rho < r:
        relaxed = True
        rho = _relaxed_radius(tr, h, N, samples)
        r = 1.0 - 0.5 * (1.0 - rho)
        M = _circle_max(tr, h, r, samples)
    M_rho = _circle_max(tr, h, rho, samples)
    L = select_node_count(M, rho, r, tau, N)
    tau_eff = roundoff_estimate(M_rho, rho, L, N, eps) / F_s if relaxed else tau
    if relaxed:
        warnings.warn(
            f"tau={tau:g} unreachable for h={h:g}, N={N}; round-off limits accuracy to about {tau_eff:.2e}",
            PlanWarning,
            stacklevel=2,
        )
    M_r = float(abs(psi_hat_h(tr, h, r)))
    return WeightPlan(h, N, tau, F_s, r, rho, L, eps, M_r, M, relaxed, float(tau_eff))


def _fft_weights(tr, h, N, rho, L):
    k = np.arange(L)
    vals = psi_hat_h(tr, h, rho * np.exp(2j * np.pi * k / L))
    coef = np.fft.fft(vals)[: N + 1] / L
    coef *= np.exp(-np.arange(N + 1) * math.log(rho))
    return coef, float(np.abs(vals).max())


@functools.lru_cache(maxsize=64)
def _compute_cached(alpha1, alpha2, c, h, N, tau, F_s, eps, r, L_factor):
    tr = ExponentialTransition(alpha1, alpha2, c)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        plan = plan_weights(tr, h, N, tau, F_s, eps, r)
    L = plan.L * L_factor
    coef, M_rho = _fft_weights(tr, h, N, plan.rho, L)
    n = np.arange(N + 1)
    disc = error_bound(plan.M_estimate, plan.rho, plan.r, L, n)
    total = disc + roundoff_estimate(M_rho, plan.rho, L, n, eps)
    imag = np.abs(coef.imag)
    if np.any(imag > np.maximum(total, plan.tau)):
        raise ArithmeticError(f"imaginary residue {imag.max():.3g} exceeds the error bound")
    if L_factor != 1:
        plan = WeightPlan(**{**plan.__dict__, "L": L})
    table = WeightTable(tr, plan, coef.real, disc, total, float(imag.max()))
    return table, tuple((str(w.message), w.category) for w in caught)


def compute_weights(
    tr: ExponentialTransition,
    h: float,
    N: int,
    tau: float = DEFAULT_TAU,
    F_s: float = DEFAULT_SAFETY,
    eps: float = EPS,
    r: float = DEFAULT_R,
    L_factor: int = 1,
) -> WeightTable:
    """Weights ``omega_0 .. omega_N`` of the backward-Euler convolution quadrature.

    Results are cached on all arguments and shared; tables are immutable.
    ``L_factor`` multiplies the planned node count, which is useful for
    checking the error estimates by refinement.
    """
    if int(L_factor) != L_factor or L_factor < 1:
        raise ValueError("L_factor must be a positive integer")
    table, caught = _compute_cached(
        tr.alpha1, tr.alpha2, tr.c, float(h), int(N), float(tau), float(F_s), float(eps), float(r), int(L_factor)
    )
    for message, category in caught:
        warnings.warn(message, category, stacklevel=2)
    return table


def co_weights(alpha: float, N: int) -> np.ndarray:
    """Coefficients of ``(1 - xi)**-alpha``: ``w_0 = 1``, ``w_j = w_{j-1} (j - 1 + alpha) / j``.

    Multiply by ``h**alpha`` to get the constant-order Grünwald–Letnikov weights.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if int(N) != N or N < 0:
        raise ValueError(f"N must be a non-negative integer, got {N}")
    j = np.arange(1, int(N) + 1, dtype=float)
    return np.concatenate(([1.0], np.cumprod((j - 1.0 + alpha) / j)))


# Binary format: little-endian float64 header (alpha1, alpha2, c, h, N, tau)
# followed by the N + 1 weights.
_HEADER = struct.Struct("<6d")


class StoredWeights(NamedTuple):
    alpha1: float
    alpha2: float
    c: float
    h: float
    N: int
    tau: float
    omegas: np.ndarray


def dump_table(table: WeightTable, path) -> None:
    """Write ``table`` in the binary cache format, atomically."""
    path = Path(path)
    tr, plan = table.transition, table.plan
    header = _HEADER.pack(tr.alpha1, tr.alpha2, tr.c, plan.h, float(plan.N), plan.tau)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(table.omegas.astype("<f8").tobytes())
    tmp.replace(path)


def load_table(path) -> StoredWeights:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    a1, a2, c, h, n, tau = _HEADER.unpack_from(data)
    N = int(n)
    body = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    if N != n or body.size != N + 1:
        raise ValueError(f"{path}: expected {n:g} + 1 weights, found {body.size}")
    return StoredWeights(a1, a2, c, h, N, tau, body.astype(float))
